/*
 * Copyright 2026 The vflcran Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef VFLCRAN_VFLCRAN_H_
#define VFLCRAN_VFLCRAN_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(VFLCRAN_BUILDING_SHARED)
#define VFL_API __attribute__((visibility("default")))
#else
#define VFL_API
#endif

typedef enum vfl_status {
  VFL_OK = 0,
  VFL_ERR_INVALID_ARGUMENT = 1,
  VFL_ERR_DIMENSION_MISMATCH = 2,
  VFL_ERR_DEGENERATE = 3,
  VFL_ERR_INFEASIBLE = 4,
  VFL_ERR_NUMERICAL = 5,
  VFL_ERR_CONFIG = 6,
  VFL_ERR_IO = 7,
  VFL_ERR_DATASET = 8,
  VFL_ERR_BUFFER_TOO_SMALL = 9,
  VFL_ERR_INTERNAL = 10
} vfl_status;

typedef struct vfl_experiment vfl_experiment;

VFL_API const char* vfl_version(void);
VFL_API const char* vfl_status_string(vfl_status status);
/* Message of the last failure on the calling thread; never NULL. */
VFL_API const char* vfl_last_error(void);

/* Parses a JSON config (unknown keys are rejected). */
VFL_API vfl_status vfl_experiment_create(const char* config_json,
                                         vfl_experiment** out);
VFL_API vfl_status vfl_experiment_load(const char* config_path,
                                       vfl_experiment** out);
VFL_API void vfl_experiment_destroy(vfl_experiment* experiment);

VFL_API vfl_status vfl_experiment_set_seed(vfl_experiment* experiment,
                                           uint64_t seed);

/* Runs the configured scheme. With out_dir non-NULL, writes the per-trial
 * CSVs and summary.json there (massive-mimo writes massive_mimo.json). */
VFL_API vfl_status vfl_experiment_run(vfl_experiment* experiment,
                                      const char* out_dir);

/* Copies the JSON summary of the last run (NUL terminated). *needed gets
 * the required size including the terminator. */
VFL_API vfl_status vfl_experiment_summary(const vfl_experiment* experiment,
                                          char* buffer, size_t capacity,
                                          size_t* needed);

/* Runs every scheme at each value of param ("capacity" in Mbps, "antennas"
 * or "servers"). Results go to out_dir when non-NULL; the sweep JSON is
 * afterwards available through vfl_experiment_summary. */
VFL_API vfl_status vfl_experiment_sweep(vfl_experiment* experiment,
                                        const char* param, const double* values,
                                        size_t count, const char* out_dir);

/* Quick Monte-Carlo and property checks. *all_passed is set to 1 or 0; the
 * report is JSON. */
VFL_API vfl_status vfl_verify(uint64_t seed, int* all_passed, char* buffer,
                              size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* VFLCRAN_VFLCRAN_H_ */
