/* Exercises the public C header from a C translation unit. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dfamcar/dfamcar.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, dfc_last_error());                               \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static int file_has(const char* path, const char* needle) {
  char buf[4096];
  FILE* f = fopen(path, "r");
  size_t n;
  if (!f) return 0;
  n = fread(buf, 1, sizeof buf - 1, f);
  buf[n] = '\0';
  fclose(f);
  return strstr(buf, needle) != NULL;
}

static int log_lines = 0;
static void on_log(const char* msg, void* user) {
  (void)msg;
  (void)user;
  ++log_lines;
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "capi_tmp";
  char corpus[512], model_path[512], out_csv[512], eval_dir[512], rec[512], ctx[512], events[512], path[600];
  dfc_config* cfg = NULL;
  dfc_model* model = NULL;
  dfc_model* loaded = NULL;
  size_t labels = 0;
  char name[64];
  FILE* f;

  snprintf(corpus, sizeof corpus, "%s/corpus", dir);
  snprintf(model_path, sizeof model_path, "%s/model.txt", dir);
  snprintf(out_csv, sizeof out_csv, "%s/labels.csv", dir);
  snprintf(eval_dir, sizeof eval_dir, "%s/eval", dir);
  snprintf(rec, sizeof rec, "%s/stream.csv", dir);
  snprintf(ctx, sizeof ctx, "%s/context.csv", dir);
  snprintf(events, sizeof events, "%s/events.jsonl", dir);

  EXPECT(strlen(dfc_version()) > 0);
  EXPECT(strcmp(dfc_status_name(DFC_ERR_PARSE), "parse_error") == 0);
  EXPECT(dfc_config_create(NULL) == DFC_ERR_ARGUMENT);
  EXPECT(dfc_config_create(&cfg) == DFC_OK);
  EXPECT(strcmp(dfc_last_error(), "") == 0);

  EXPECT(dfc_config_set(cfg, "colour", "blue") == DFC_ERR_CONFIG);
  EXPECT(strstr(dfc_last_error(), "colour") != NULL);
  EXPECT(dfc_config_set(cfg, "g", "0") == DFC_ERR_CONFIG);
  EXPECT(dfc_config_set(cfg, "sensors", "acc,baro") == DFC_ERR_CONFIG);
  EXPECT(dfc_config_set(cfg, "protocol", "bootstrap") == DFC_ERR_CONFIG);

  EXPECT(dfc_config_set(cfg, "participants", "2") == DFC_OK);
  EXPECT(dfc_config_set(cfg, "duration", "21") == DFC_OK);
  EXPECT(dfc_config_set(cfg, "W", "64") == DFC_OK);
  EXPECT(dfc_config_set(cfg, "seed", "3") == DFC_OK);
  EXPECT(dfc_generate_corpus(cfg, corpus) == DFC_OK);
  snprintf(path, sizeof path, "%s/labels.csv", corpus);
  EXPECT(file_has(path, "recording_id,participant_id,label,placement"));

  EXPECT(dfc_model_train(cfg, corpus, &model) == DFC_OK);
  EXPECT(dfc_model_save(model, model_path) == DFC_OK);
  EXPECT(dfc_model_load(model_path, &loaded) == DFC_OK);
  EXPECT(dfc_model_label_count(loaded, &labels) == DFC_OK);
  EXPECT(labels == 24);
  EXPECT(dfc_model_label(loaded, 0, name, sizeof name) == DFC_OK);
  EXPECT(strcmp(name, "standing") == 0);
  EXPECT(dfc_model_label(loaded, 0, name, 3) == DFC_ERR_ARGUMENT);
  EXPECT(dfc_model_label(loaded, 99, name, sizeof name) == DFC_ERR_ARGUMENT);

  snprintf(path, sizeof path, "%s/recordings/rec0002.csv", corpus);
  EXPECT(dfc_classify_recording(loaded, cfg, path, out_csv) == DFC_OK);
  EXPECT(file_has(out_csv, "window_index,label,score\n0,walking,"));

  /* The model carries W=64, so a changed sensor set must be rejected. */
  EXPECT(dfc_config_set(cfg, "sensors", "acc") == DFC_OK);
  EXPECT(dfc_classify_recording(loaded, cfg, path, out_csv) == DFC_ERR_SHAPE);
  EXPECT(dfc_config_set(cfg, "sensors", "acc,gyr") == DFC_OK);

  EXPECT(dfc_config_set(cfg, "model", "dfam,nb") == DFC_OK);
  EXPECT(dfc_config_set(cfg, "k", "3") == DFC_OK);
  dfc_set_log_callback(on_log, NULL);
  EXPECT(dfc_evaluate(cfg, corpus, eval_dir) == DFC_OK);
  dfc_set_log_callback(NULL, NULL);
  EXPECT(log_lines > 0);
  snprintf(path, sizeof path, "%s/cells.csv", eval_dir);
  EXPECT(file_has(path, "kfold,dfam,64,3,acc+gyr,"));
  EXPECT(file_has(path, "kfold,nb,64,,acc+gyr,"));
  snprintf(path, sizeof path, "%s/report.json", eval_dir);
  EXPECT(file_has(path, "\"protocol\""));

  EXPECT(dfc_generate_stream(cfg, rec, ctx, NULL) == DFC_OK);
  EXPECT(dfc_replay(cfg, loaded, loaded, rec, ctx, events, NULL) == DFC_ERR_CONFIG);
  EXPECT(strstr(dfc_last_error(), "binary") != NULL);
  EXPECT(dfc_replay(cfg, NULL, loaded, rec, ctx, events, NULL) == DFC_ERR_CONFIG);

  EXPECT(dfc_model_load("does/not/exist.txt", &model) == DFC_ERR_IO);
  f = fopen(model_path, "w");
  fputs("DFAM v1 W=64 fs=50 g=1 axes=1 bounds=\nwalking;7\nsitting;x\n", f);
  fclose(f);
  dfc_model_destroy(loaded);
  loaded = NULL;
  EXPECT(dfc_model_load(model_path, &loaded) == DFC_ERR_PARSE);
  EXPECT(strstr(dfc_last_error(), ":3:") != NULL);
  EXPECT(loaded == NULL);

  f = fopen(rec, "w");
  fputs("timestamp_ms,device,sensor,x,y,z\n0,phone,acc,1,2,3\n20,phone,acc,1,2\n", f);
  fclose(f);
  EXPECT(dfc_classify_recording(model, cfg, rec, out_csv) == DFC_ERR_PARSE);
  EXPECT(strstr(dfc_last_error(), ":3:") != NULL);

  EXPECT(dfc_classify_recording(NULL, cfg, rec, out_csv) == DFC_ERR_ARGUMENT);
  EXPECT(dfc_evaluate(cfg, corpus, NULL) == DFC_ERR_ARGUMENT);

  dfc_model_destroy(model);
  dfc_config_destroy(cfg);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("c api: all checks passed\n");
  return failures ? 1 : 0;
}
