#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsmae.h"

namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    fs::path p = fs::temp_directory_path() / "hsmae_capi_test";
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

// 2x2x2 float32 ENVI bsq pair
void write_envi_pair(const fs::path& hdr, const fs::path& raw, bool with_fwhm) {
    std::string text =
        "ENVI\n"
        "samples = 2\nlines = 2\nbands = 2\ndata type = 4\ninterleave = bsq\nbyte order = 0\n"
        "wavelength = { 500.0, 600.0 }\n";
    if (with_fwhm) text += "fwhm = { 5.0, 5.0 }\n";
    write_text(hdr, text);
    std::vector<float> vals = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f, 0.7f, 0.8f};
    std::ofstream f(raw, std::ios::binary);
    f.write(reinterpret_cast<const char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(float)));
}

}  // namespace

TEST_CASE("capi: ENVI read, dims, metadata, native round trip") {
    fs::path dir = workdir();
    write_envi_pair(dir / "cube.hdr", dir / "cube.raw", true);

    hsmae_cube* cube = nullptr;
    REQUIRE(hsmae_cube_read_envi((dir / "cube.hdr").string().c_str(),
                                 (dir / "cube.raw").string().c_str(), 0.0, &cube) == HSMAE_OK);
    int32_t w = 0, h = 0, c = 0;
    CHECK(hsmae_cube_dims(cube, &w, &h, &c) == HSMAE_OK);
    CHECK(w == 2);
    CHECK(h == 2);
    CHECK(c == 2);
    double wl[2], bw[2];
    CHECK(hsmae_cube_channel_meta(cube, wl, bw) == HSMAE_OK);
    CHECK(wl[0] == 500.0);
    CHECK(wl[1] == 600.0);
    CHECK(bw[0] == 5.0);

    fs::path native = dir / "cube.hsc";
    CHECK(hsmae_cube_write_native(cube, native.string().c_str()) == HSMAE_OK);
    hsmae_cube_free(cube);

    hsmae_cube* back = nullptr;
    REQUIRE(hsmae_cube_read_native(native.string().c_str(), &back) == HSMAE_OK);
    CHECK(hsmae_cube_dims(back, &w, &h, &c) == HSMAE_OK);
    CHECK(c == 2);
    hsmae_cube_free(back);
}

TEST_CASE("capi: missing fwhm fails as parse error unless a default is given") {
    fs::path dir = workdir();
    write_envi_pair(dir / "nofwhm.hdr", dir / "nofwhm.raw", false);

    hsmae_cube* cube = nullptr;
    hsmae_status st = hsmae_cube_read_envi((dir / "nofwhm.hdr").string().c_str(),
                                           (dir / "nofwhm.raw").string().c_str(), 0.0, &cube);
    CHECK(st == HSMAE_ERR_PARSE);
    CHECK(std::strlen(hsmae_last_error()) > 0);

    REQUIRE(hsmae_cube_read_envi((dir / "nofwhm.hdr").string().c_str(),
                                 (dir / "nofwhm.raw").string().c_str(), 7.5, &cube) == HSMAE_OK);
    double bw[2];
    CHECK(hsmae_cube_channel_meta(cube, nullptr, bw) == HSMAE_OK);
    CHECK(bw[0] == 7.5);
    CHECK(bw[1] == 7.5);
    hsmae_cube_free(cube);
}

TEST_CASE("capi: error statuses by failure class") {
    hsmae_cube* cube = nullptr;
    // nonexistent path -> IO
    CHECK(hsmae_cube_read_native("/definitely/not/here.hsc", &cube) == HSMAE_ERR_IO);
    // null arguments -> INVALID
    CHECK(hsmae_cube_read_native(nullptr, &cube) == HSMAE_ERR_INVALID);
    CHECK(hsmae_cube_dims(nullptr, nullptr, nullptr, nullptr) == HSMAE_ERR_INVALID);

    // malformed header -> PARSE
    fs::path dir = workdir();
    write_text(dir / "bad.hdr", "this is not an envi header");
    char* json_text = nullptr;
    CHECK(hsmae_envi_header_to_json((dir / "bad.hdr").string().c_str(), &json_text) ==
          HSMAE_ERR_PARSE);

    // malformed config JSON -> INVALID
    write_text(dir / "bad_config.json", "{ nope");
    CHECK(hsmae_run_pretrain((dir / "bad_config.json").string().c_str()) == HSMAE_ERR_INVALID);
}

TEST_CASE("capi: header JSON summary parses and carries the key fields") {
    fs::path dir = workdir();
    write_envi_pair(dir / "sum.hdr", dir / "sum.raw", true);
    char* json_text = nullptr;
    REQUIRE(hsmae_envi_header_to_json((dir / "sum.hdr").string().c_str(), &json_text) == HSMAE_OK);
    auto j = nlohmann::json::parse(json_text);
    CHECK(j["samples"] == 2);
    CHECK(j["lines"] == 2);
    CHECK(j["bands"] == 2);
    CHECK(j["interleave"] == "bsq");
    CHECK(j["has_wavelength"] == true);
    CHECK(j["has_fwhm"] == true);
    CHECK(j["wavelength"][1] == 600.0);
    hsmae_string_free(json_text);
}

TEST_CASE("capi: stratify is deterministic and sorted") {
    fs::path dir = workdir();
    nlohmann::json catalog = nlohmann::json::array();
    for (int i = 0; i < 40; ++i) {
        catalog.push_back({{"tile_id", "t" + std::to_string(100 + i)},
                           {"latitude_deg", -60.0 + 3.1 * i},
                           {"longitude_deg", -120.0 + 5.7 * i},
                           {"acquisition_month", 1 + i % 12},
                           {"biome_id", i % 15}});
    }
    write_text(dir / "catalog.json", catalog.dump());

    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(hsmae_stratify((dir / "catalog.json").string().c_str(), 42, &a) == HSMAE_OK);
    REQUIRE(hsmae_stratify((dir / "catalog.json").string().c_str(), 42, &b) == HSMAE_OK);
    CHECK(std::string(a) == std::string(b));
    CHECK(std::string(a).find("t1") != std::string::npos);
    // sorted lines
    std::string prev;
    std::string text(a);
    std::size_t pos = 0;
    int lines = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string line = text.substr(pos, nl - pos);
        CHECK(prev <= line);
        prev = line;
        pos = nl + 1;
        ++lines;
    }
    CHECK(lines > 0);
    hsmae_string_free(a);
    hsmae_string_free(b);

    // invalid record -> INVALID
    catalog[0]["biome_id"] = 99;
    write_text(dir / "bad_catalog.json", catalog.dump());
    char* out = nullptr;
    CHECK(hsmae_stratify((dir / "bad_catalog.json").string().c_str(), 1, &out) ==
          HSMAE_ERR_INVALID);
}

TEST_CASE("capi: run entry points surface status codes for missing files") {
    CHECK(hsmae_run_pretrain("/no/such/config.json") == HSMAE_ERR_IO);
    CHECK(hsmae_run_finetune("/no/such/config.json") == HSMAE_ERR_IO);
    CHECK(hsmae_run_eval("/no/such/config.json") == HSMAE_ERR_IO);
    CHECK(hsmae_run_pretrain(nullptr) == HSMAE_ERR_INVALID);
    CHECK(hsmae_run_reconstruct("/no/ckpt.hsck", "/no/cube.hsc", 0.75, 0.75, 1, "/tmp/x") ==
          HSMAE_ERR_IO);
}
