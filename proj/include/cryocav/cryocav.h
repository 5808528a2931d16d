/* C interface to the cryocav library. All functions return a status code;
 * on failure cryocav_last_error() holds a message for the calling thread. */
#ifndef CRYOCAV_H
#define CRYOCAV_H

#include <stddef.h>
#include <stdint.h>

#if defined(CRYOCAV_BUILDING_LIBRARY)
#define CRYOCAV_API __attribute__((visibility("default")))
#else
#define CRYOCAV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cryocav_status {
  CRYOCAV_OK = 0,
  CRYOCAV_ERR_VALIDATION = 1,
  CRYOCAV_ERR_NUMERICAL = 2,
  CRYOCAV_ERR_IO = 3,
  CRYOCAV_ERR_INTERNAL = 4
} cryocav_status;

typedef enum cryocav_unit { CRYOCAV_UNIT_METER = 0, CRYOCAV_UNIT_TRANSMISSION = 1 } cryocav_unit;
typedef enum cryocav_lock_side { CRYOCAV_BELOW_RESONANCE = 0, CRYOCAV_ABOVE_RESONANCE = 1 } cryocav_lock_side;

typedef struct cryocav_config cryocav_config;
typedef struct cryocav_trace cryocav_trace;

CRYOCAV_API const char* cryocav_version(void);
CRYOCAV_API const char* cryocav_last_error(void);
/* Frees strings returned through char** out-parameters. */
CRYOCAV_API void cryocav_string_free(char* s);

/* ---- configuration ---- */
CRYOCAV_API cryocav_status cryocav_config_parse(const char* text, cryocav_config** out);
CRYOCAV_API cryocav_status cryocav_config_load(const char* path, cryocav_config** out);
CRYOCAV_API cryocav_status cryocav_config_default(cryocav_config** out);
CRYOCAV_API void cryocav_config_free(cryocav_config* config);
CRYOCAV_API cryocav_status cryocav_config_serialize(const cryocav_config* config, char** out);
/* 16 hex digits plus terminator. */
CRYOCAV_API cryocav_status cryocav_config_hash(const cryocav_config* config, char out[17]);

/* ---- pipeline ---- */
typedef struct cryocav_run_options {
  const char* out_dir;  /* NULL: current directory */
  const char* base_dir; /* relative [io] paths; NULL: current directory */
  int has_seed;
  uint64_t seed;
  unsigned parallel;
} cryocav_run_options;

typedef struct cryocav_run_result {
  int exit_code; /* 0 ok, 1 validation or I/O, 2 numerical */
  char* summary; /* key = value lines; free with cryocav_string_free */
  char* error;   /* one line, empty on success; free with cryocav_string_free */
} cryocav_run_result;

CRYOCAV_API cryocav_status cryocav_run(const char* command, const cryocav_config* config,
                                       const cryocav_run_options* options, cryocav_run_result* result);
CRYOCAV_API const char* cryocav_usage(void);

/* ---- traces ---- */
CRYOCAV_API cryocav_status cryocav_trace_create(double dt_s, const double* values, size_t count, cryocav_unit unit,
                                                cryocav_trace** out);
CRYOCAV_API void cryocav_trace_free(cryocav_trace* trace);
CRYOCAV_API size_t cryocav_trace_size(const cryocav_trace* trace);
CRYOCAV_API double cryocav_trace_dt(const cryocav_trace* trace);
CRYOCAV_API cryocav_unit cryocav_trace_unit(const cryocav_trace* trace);
CRYOCAV_API const double* cryocav_trace_values(const cryocav_trace* trace);
CRYOCAV_API cryocav_status cryocav_trace_read(const char* path, cryocav_trace** out);
CRYOCAV_API cryocav_status cryocav_trace_write(const cryocav_trace* trace, const char* path);

/* ---- cavity ---- */
typedef struct cryocav_cavity {
  double wavelength_m;
  double finesse;
  int mode_number;
  double peak_transmission;
} cryocav_cavity;

typedef struct cryocav_lock_point {
  double offset_m;
  double transmission;
  double slope_per_m;
} cryocav_lock_point;

typedef struct cryocav_resonance_fit {
  double peak_transmission;
  double resonance_length_m;
  double finesse;
  double rms_residual;
  int iterations;
} cryocav_resonance_fit;

CRYOCAV_API void cryocav_cavity_default(cryocav_cavity* out);
CRYOCAV_API cryocav_status cryocav_spatial_linewidth(double finesse, double wavelength_m, double* out);
CRYOCAV_API cryocav_status cryocav_transmission(const cryocav_cavity* cavity, double z_m, double* out);
CRYOCAV_API cryocav_status cryocav_find_lock_point(const cryocav_cavity* cavity, cryocav_lock_side side,
                                                   cryocav_lock_point* out);
CRYOCAV_API cryocav_status cryocav_fit_resonance(const double* z_m, const double* transmission, size_t count,
                                                 double wavelength_m, cryocav_resonance_fit* out);

/* ---- mechanics ---- */
typedef struct cryocav_stage {
  double resonance_hz;
  double damping_ratio;
} cryocav_stage;

CRYOCAV_API cryocav_status cryocav_stage_from_spring(double spring_constant_n_per_m, int springs, double payload_kg,
                                                     double damping_ratio, cryocav_stage* out);
CRYOCAV_API cryocav_status cryocav_transmissibility(const cryocav_stage* stage, double f_hz, double* out);
CRYOCAV_API cryocav_status cryocav_default_cold_plate(uint64_t seed, double duration_s, double dt_s,
                                                      cryocav_trace** out);
CRYOCAV_API cryocav_status cryocav_apply_stage(const cryocav_trace* input, const cryocav_stage* stage,
                                               cryocav_trace** out);

/* ---- analysis ---- */
CRYOCAV_API cryocav_status cryocav_rms(const cryocav_trace* trace, double* out);
/* window_s <= 0 selects the global peak-to-peak. */
CRYOCAV_API cryocav_status cryocav_peak_to_peak(const cryocav_trace* trace, double window_s, double* out);

/* ---- lock ---- */
typedef struct cryocav_lock_config {
  double kp;
  double ki;
  double actuator_cutoff_hz;
  double notch_hz; /* <= 0: no notch */
  double notch_q;
  double sensor_noise_rms;
  cryocav_lock_side side;
  double sample_rate_hz;
} cryocav_lock_config;

CRYOCAV_API void cryocav_lock_config_default(cryocav_lock_config* out);
CRYOCAV_API cryocav_status cryocav_unity_gain_frequency(const cryocav_lock_config* config, double* out);
CRYOCAV_API cryocav_status cryocav_simulate_lock(const cryocav_trace* disturbance, const cryocav_cavity* cavity,
                                                 const cryocav_lock_config* config, uint64_t seed,
                                                 cryocav_trace** residual, cryocav_trace** actuator);

/* ---- polariton ---- */
typedef struct cryocav_polariton {
  double exciton_energy_mev;
  double exciton_linewidth_mev;
  double cavity_linewidth_mev;
  double coupling_mev;
  double detuning_mev;
} cryocav_polariton;

/* out = {Re E+, Im E+, Re E-, Im E-} */
CRYOCAV_API cryocav_status cryocav_polariton_eigenenergies(const cryocav_polariton* model, double out[4]);
CRYOCAV_API cryocav_status cryocav_normal_mode_splitting(const cryocav_polariton* model, double detuning_min_mev,
                                                         double detuning_max_mev, double* splitting_mev,
                                                         double* detuning_mev);
CRYOCAV_API cryocav_status cryocav_cooperativity(double splitting_mev, double kappa_mev, double gamma_mev,
                                                 double* out);

#ifdef __cplusplus
}
#endif

#endif
