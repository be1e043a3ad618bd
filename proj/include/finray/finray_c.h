#ifndef FINRAY_C_H
#define FINRAY_C_H

/* C interface to the finray finger design and analysis core.
 *
 * All functions return fr_status; outputs go through pointers. Handles are
 * opaque and freed with the matching fr_*_free call. fr_last_error() returns
 * a thread-local message for the most recent failure. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fr_status {
    FR_OK = 0,
    FR_ERR_CONFIG = 1,   /* bad input or configuration */
    FR_ERR_UNKNOWN = 2,  /* unknown material / design / scenario name */
    FR_ERR_NUMERIC = 3,  /* solver or contact resolution failure */
} fr_status;

const char* fr_last_error(void);

int fr_version_major(void);
int fr_version_minor(void);

/* Materials ---------------------------------------------------------- */

typedef struct fr_material fr_material;

fr_status fr_material_builtin(const char* name, fr_material** out);
/* property: youngs_modulus_mpa, yield_strength_mpa, ultimate_strength_mpa,
 * poisson_ratio, density_g_cm3 */
fr_status fr_material_get(const fr_material* m, const char* property, double* out);
void fr_material_free(fr_material* m);

fr_status fr_rib_spacing(double density, double line_width_mm, double* out_mm);

/* Finger designs ------------------------------------------------------ */

typedef struct fr_design fr_design;

fr_status fr_design_create(fr_design** out);
fr_status fr_design_set_material(fr_design* d, const fr_material* m);
/* key: infill_direction_deg, infill_density, notch_width_mm, mount_angle_deg,
 * envelope_height_mm, envelope_base_width_mm, envelope_depth_mm,
 * line_width_mm, layer_depth_mm */
fr_status fr_design_set(fr_design* d, const char* key, double value);
/* style: rounded, flat, notched_rounded, flat_angled, notched_contact_plane */
fr_status fr_design_set_fingertip(fr_design* d, const char* style);
void fr_design_free(fr_design* d);

fr_status fr_design_export_stl(const fr_design* d, const char* path);

/* Frames and analysis -------------------------------------------------- */

typedef struct fr_frame fr_frame;

fr_status fr_frame_build(const fr_design* d, int elems_per_member, fr_frame** out);
int fr_frame_node_count(const fr_frame* f);
int fr_frame_element_count(const fr_frame* f);
int fr_frame_tip_node(const fr_frame* f);
fr_status fr_frame_export_svg(const fr_frame* f, const char* path);
void fr_frame_free(fr_frame* f);

typedef struct fr_stiffness {
    double kxx, kyy, kzz, kzy; /* N/mm */
} fr_stiffness;

fr_status fr_identify_stiffness(const fr_frame* f, double amplitude_scale, fr_stiffness* out);
fr_status fr_principal_axis(const fr_stiffness* k, double* angle_from_z_deg,
                            double* stiff_n_mm, double* soft_n_mm);
fr_status fr_extrapolate_stiffness(double angle1_deg, double k1, double angle2_deg, double k2,
                                   double target_angle_deg, double* value, double* slope);
fr_status fr_fit_viscoelastic(const double* displacement_mm, const double* velocity_mm_s,
                              const double* force_n, size_t count, double* k_n_mm,
                              double* b_ns_mm, double* residual_rms_n);
double fr_viscous_force(double b_ns_mm, double speed_mm_s);

/* mode_buf receives "yield" or "buckling". */
fr_status fr_strength_sweep(const fr_frame* f, double dir_y, double dir_z, double* max_force_n,
                            double* max_deflection_mm, char* mode_buf, size_t mode_buf_len);

/* Studies -------------------------------------------------------------- */

typedef struct fr_study fr_study;

fr_status fr_study_load(const char* config_path, fr_study** out);
fr_status fr_study_load_json(const char* json_text, fr_study** out);
fr_status fr_study_design(fr_study* s, const char* design_id, const char* out_dir);
fr_status fr_study_characterize(fr_study* s, const char* out_dir, int jobs);
/* axis: "x" or "y"; step_mm <= 0 uses the configured sweep step. */
fr_status fr_study_sweep(fr_study* s, const char* scenario_id, const char* axis, double step_mm,
                         const char* out_dir, int jobs);
fr_status fr_study_simulate(fr_study* s, const char* scenario_id, const char* out_dir);
/* samples_csv: displacement_mm,velocity_mm_s,force_n per line (header ok). */
fr_status fr_study_fit_visco(fr_study* s, const char* samples_csv_path, const char* out_dir);
void fr_study_free(fr_study* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FINRAY_C_H */
