#include "dfamcar/activity.hpp"

#include <algorithm>
#include <array>

#include "dfamcar/common.hpp"

namespace dfamcar {

namespace {
constexpr std::array<std::string_view, kLocomotionCount> kLocomotionNames = {
    "standing", "walking", "climbing_stairs", "descending_stairs", "sitting", "running"};
constexpr std::array<std::string_view, kDistractionCount> kDistractionNames = {
    "using_smartphone", "reading", "eating", "drinking"};
}  // namespace

std::string_view to_string(Locomotion l) { return kLocomotionNames[static_cast<std::size_t>(l)]; }
std::string_view to_string(Distraction d) { return kDistractionNames[static_cast<std::size_t>(d)]; }

bool is_moving(Locomotion l) { return l != Locomotion::standing && l != Locomotion::sitting; }

bool ActivityLabel::is_moving() const { return dfamcar::is_moving(locomotion); }

std::string ActivityLabel::name() const {
  std::string out(to_string(locomotion));
  if (distraction) {
    out += '+';
    out += to_string(*distraction);
  }
  return out;
}

ActivityLabel ActivityLabel::parse(std::string_view text) {
  const auto plus = text.find('+');
  const auto loc_text = text.substr(0, plus);
  ActivityLabel label;
  const auto loc = std::find(kLocomotionNames.begin(), kLocomotionNames.end(), loc_text);
  if (loc == kLocomotionNames.end()) throw ConfigError("unknown locomotion '" + std::string(loc_text) + "'");
  label.locomotion = static_cast<Locomotion>(loc - kLocomotionNames.begin());
  if (plus != std::string_view::npos) {
    const auto dis_text = text.substr(plus + 1);
    const auto dis = std::find(kDistractionNames.begin(), kDistractionNames.end(), dis_text);
    if (dis == kDistractionNames.end()) throw ConfigError("unknown distraction '" + std::string(dis_text) + "'");
    label.distraction = static_cast<Distraction>(dis - kDistractionNames.begin());
  }
  return label;
}

std::strong_ordering operator<=>(const ActivityLabel& a, const ActivityLabel& b) {
  if (a.distraction.has_value() != b.distraction.has_value()) {
    return a.distraction.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (auto c = static_cast<int>(a.locomotion) <=> static_cast<int>(b.locomotion); c != 0) return c;
  if (!a.distraction) return std::strong_ordering::equal;
  return static_cast<int>(*a.distraction) <=> static_cast<int>(*b.distraction);
}

const std::vector<ActivityLabel>& study_activities() {
  static const std::vector<ActivityLabel> all = [] {
    using L = Locomotion;
    using D = Distraction;
    std::vector<ActivityLabel> v;
    for (int i = 0; i < kLocomotionCount; ++i) v.push_back({static_cast<L>(i), std::nullopt});
    const std::pair<L, D> concurrent[] = {
        {L::walking, D::using_smartphone},           {L::walking, D::reading},
        {L::climbing_stairs, D::eating},             {L::walking, D::eating},
        {L::descending_stairs, D::eating},           {L::walking, D::drinking},
        {L::climbing_stairs, D::drinking},           {L::standing, D::drinking},
        {L::climbing_stairs, D::using_smartphone},   {L::standing, D::reading},
        {L::descending_stairs, D::using_smartphone}, {L::standing, D::eating},
        {L::running, D::using_smartphone},           {L::sitting, D::using_smartphone},
        {L::standing, D::using_smartphone},          {L::descending_stairs, D::reading},
        {L::descending_stairs, D::drinking},         {L::climbing_stairs, D::reading},
    };
    for (const auto& [l, d] : concurrent) v.push_back({l, d});
    std::sort(v.begin(), v.end());
    return v;
  }();
  return all;
}

}  // namespace dfamcar
