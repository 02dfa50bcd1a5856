#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfamcar {

enum class Locomotion { standing, walking, climbing_stairs, descending_stairs, sitting, running };
enum class Distraction { using_smartphone, reading, eating, drinking };

inline constexpr int kLocomotionCount = 6;
inline constexpr int kDistractionCount = 4;

std::string_view to_string(Locomotion l);
std::string_view to_string(Distraction d);

/// A simple (locomotion only) or concurrent (locomotion + distraction)
/// activity. Text form is "walking" or "walking+eating".
struct ActivityLabel {
  Locomotion locomotion = Locomotion::standing;
  std::optional<Distraction> distraction;

  std::string name() const;
  static ActivityLabel parse(std::string_view text);

  bool is_moving() const;
  /// Concurrent activity performed while moving (the unstarred rows).
  bool is_distracted_pedestrian() const { return distraction.has_value() && is_moving(); }

  friend bool operator==(const ActivityLabel&, const ActivityLabel&) = default;
  /// Canonical order: simple activities first, then concurrent ones by
  /// (locomotion, distraction) enumeration order.
  friend std::strong_ordering operator<=>(const ActivityLabel& a, const ActivityLabel& b);
};

bool is_moving(Locomotion l);

/// The 6 simple and 18 concurrent activities of the study protocol, in
/// canonical order.
const std::vector<ActivityLabel>& study_activities();

}  // namespace dfamcar
