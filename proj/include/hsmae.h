/* C API for the hyperspectral masked-autoencoder pipeline.
 *
 * All functions return hsmae_status; HSMAE_OK is 0. On failure,
 * hsmae_last_error() returns a thread-local description of the most recent
 * error. Objects are opaque handles released with their _free function.
 * Strings returned through char** are heap-allocated; release them with
 * hsmae_string_free.
 */
#ifndef HSMAE_H
#define HSMAE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsmae_status {
    HSMAE_OK = 0,
    HSMAE_ERR_IO = 1,
    HSMAE_ERR_PARSE = 2,
    HSMAE_ERR_INVALID = 3,
    HSMAE_ERR_RUNTIME = 4
} hsmae_status;

const char* hsmae_last_error(void);

/* ---- cubes ---- */

typedef struct hsmae_cube hsmae_cube;

/* default_bandwidth_nm <= 0 means "no default" (headers without fwhm fail). */
hsmae_status hsmae_cube_read_envi(const char* hdr_path, const char* raw_path,
                                  double default_bandwidth_nm, hsmae_cube** out);
hsmae_status hsmae_cube_read_native(const char* path, hsmae_cube** out);
hsmae_status hsmae_cube_write_native(const hsmae_cube* cube, const char* path);
hsmae_status hsmae_cube_dims(const hsmae_cube* cube, int32_t* width, int32_t* height,
                             int32_t* channels);
/* wavelengths/bandwidths may be NULL; arrays must hold `channels` doubles. */
hsmae_status hsmae_cube_channel_meta(const hsmae_cube* cube, double* wavelengths_nm,
                                     double* bandwidths_nm);
void hsmae_cube_free(hsmae_cube* cube);

/* ---- ENVI header inspection ---- */

/* JSON summary of a parsed .hdr file. */
hsmae_status hsmae_envi_header_to_json(const char* hdr_path, char** json_out);

/* ---- EnMAP-style catalog stratification ---- */

/* One tile id per line, sorted, deterministic under seed. */
hsmae_status hsmae_stratify(const char* catalog_json_path, uint64_t seed, char** tile_ids_out);

/* ---- pipeline commands (JSON config files, see README for schemas) ---- */

hsmae_status hsmae_run_pretrain(const char* config_json_path);
hsmae_status hsmae_run_finetune(const char* config_json_path);
hsmae_status hsmae_run_eval(const char* config_json_path);

hsmae_status hsmae_run_reconstruct(const char* checkpoint_path, const char* cube_path,
                                   double r_spatial, double r_channel, uint64_t seed,
                                   const char* out_dir);

void hsmae_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* HSMAE_H */
