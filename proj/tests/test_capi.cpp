#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "phgm/phgm.h"

namespace fs = std::filesystem;

namespace {

const double kSquare[] = {0, 0, 1, 0, 1, 1, 0, 1};

phgm_features* square_features() {
  phgm_features* f = nullptr;
  REQUIRE(phgm_features_extract(kSquare, 4, 2, PHGM_INPUT_POINTS, "{\"death_scale\": 1}", &f) == PHGM_OK);
  return f;
}

std::vector<double> ones(int n) { return std::vector<double>(static_cast<std::size_t>(n) * n, 1.0); }

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("version and status names") {
    CHECK(std::string(phgm_version()).size() > 0);
    CHECK(std::string(phgm_status_name(PHGM_OK)) == "ok");
    CHECK(std::string(phgm_status_name(PHGM_BAD_K)) == "bad_k");
  }

  TEST_CASE("features of the unit square") {
    phgm_features* f = square_features();
    CHECK(phgm_features_n(f) == 4);
    CHECK(phgm_features_loop_count(f) == 1);
    // Kruskal steps at death 1 see 6, 5 and 3 admissible unit-rate edges.
    const double h0 = -14.0;
    const double h1 = -1.0 - std::sqrt(2.0) + std::log(std::exp(-1.0) - std::exp(-std::sqrt(2.0)));
    double ll = 0.0;
    const auto lam = ones(4);
    REQUIRE(phgm_features_loglik(f, lam.data(), 4, &ll) == PHGM_OK);
    CHECK(ll == doctest::Approx(h0 + h1).epsilon(1e-13));
    CHECK(phgm_features_loglik(f, lam.data(), 3, &ll) == PHGM_SHAPE_MISMATCH);

    char* text = nullptr;
    REQUIRE(phgm_features_to_json(f, &text) == PHGM_OK);
    phgm_features* g = nullptr;
    REQUIRE(phgm_features_from_json(text, &g) == PHGM_OK);
    phgm_free_string(text);
    double d = -1.0;
    REQUIRE(phgm_bottleneck_distance(f, g, 1, &d) == PHGM_OK);
    CHECK(d == 0.0);
    CHECK(phgm_bottleneck_distance(f, g, 2, &d) == PHGM_INVALID_ARGUMENT);

    const fs::path path = fs::temp_directory_path() / "phgm_capi_square.json";
    REQUIRE(phgm_features_write(f, path.c_str()) == PHGM_OK);
    phgm_features* h = nullptr;
    REQUIRE(phgm_features_read(path.c_str(), &h) == PHGM_OK);
    CHECK(phgm_features_loop_count(h) == 1);
    phgm_features_free(f);
    phgm_features_free(g);
    phgm_features_free(h);
  }

  TEST_CASE("errors are reported through status codes") {
    phgm_features* f = nullptr;
    const double asym[] = {0, 1, 2, 0};
    CHECK(phgm_features_extract(asym, 2, 2, PHGM_INPUT_DISTANCES, nullptr, &f) == PHGM_NOT_SYMMETRIC);
    CHECK(std::string(phgm_last_error()).size() > 0);
    CHECK(f == nullptr);
    CHECK(phgm_features_extract(kSquare, 4, 2, PHGM_INPUT_POINTS, "{not json", &f) == PHGM_PARSE);
    CHECK(phgm_features_extract(kSquare, 4, 2, PHGM_INPUT_POINTS, nullptr, nullptr) == PHGM_INVALID_ARGUMENT);
    CHECK(phgm_features_read("/nonexistent/phgm.json", &f) == PHGM_IO);
    CHECK(phgm_features_from_json("{\"n\": 3}", &f) == PHGM_PARSE);
    const double zero_row[] = {0, 0, 0, 0, 0, 1, 0, 1, 0};
    CHECK(phgm_features_extract(zero_row, 3, 3, PHGM_INPUT_CONNECTIVITY, "{\"embed_dim\": 1}", &f) ==
          PHGM_ISOLATED_VERTEX);
    phgm_features_free(nullptr);
  }

  TEST_CASE("fdr selection") {
    const double v[] = {0.99, 0.95, 0.5};
    int out[3];
    size_t count = 9;
    REQUIRE(phgm_fdr_select(v, 3, 0.1, out, &count) == PHGM_OK);
    REQUIRE(count == 2);
    CHECK(out[0] == 0);
    CHECK(out[1] == 1);
    REQUIRE(phgm_fdr_select(nullptr, 0, 0.1, nullptr, &count) == PHGM_OK);
    CHECK(count == 0);
  }

  TEST_CASE("simulate, fit at the mode, sample and persist draws") {
    const int n = 6;
    std::vector<double> lam(n * n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) lam[j * n + k] = 0.5 + 0.1 * ((j + k) % 3);
    std::vector<phgm_features*> feats(20, nullptr);
    REQUIRE(phgm_simulate_from_model(lam.data(), n, 20, 4, feats.data()) == PHGM_OK);
    phgm_dataset* d = nullptr;
    REQUIRE(phgm_dataset_new(&d) == PHGM_OK);
    for (int s = 0; s < 20; ++s) REQUIRE(phgm_dataset_add(d, s < 10 ? "a" : "b", feats[s]) == PHGM_OK);
    CHECK(phgm_dataset_groups(d) == 2);
    CHECK(phgm_dataset_subjects(d) == 20);
    phgm_features* sq = square_features();
    CHECK(phgm_dataset_add(d, "a", sq) == PHGM_SHAPE_MISMATCH);
    phgm_features_free(sq);

    phgm_fit* map = nullptr;
    REQUIRE(phgm_fit_map(d, "{\"seed\": 1}", &map) == PHGM_OK);
    CHECK(phgm_fit_draws(map) == 1);
    CHECK(phgm_fit_groups(map) == 2);
    std::vector<double> mean(n * n);
    REQUIRE(phgm_fit_lambda_mean(map, 1, mean.data()) == PHGM_OK);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        CHECK(mean[j * n + k] > 0.0);
        CHECK(mean[j * n + k] == mean[k * n + j]);
      }

    phgm_fit* fit = nullptr;
    REQUIRE(phgm_fit_run(d, "{\"n_warmup\": 40, \"n_samples\": 15, \"seed\": 2}", &fit) == PHGM_OK);
    CHECK(phgm_fit_draws(fit) == 15);
    CHECK(phgm_fit_n(fit) == n);
    const fs::path path = fs::temp_directory_path() / "phgm_capi_draws.jsonl";
    REQUIRE(phgm_fit_write_draws(fit, path.c_str()) == PHGM_OK);
    phgm_fit* back = nullptr;
    REQUIRE(phgm_fit_read_draws(path.c_str(), &back) == PHGM_OK);
    CHECK(phgm_fit_draws(back) == 15);
    std::vector<double> m1(n * n), m2(n * n);
    phgm_fit_lambda_mean(fit, 0, m1.data());
    phgm_fit_lambda_mean(back, 0, m2.data());
    CHECK(m1 == m2);
    CHECK(phgm_fit_run(d, "{\"target_accept\": 2}", &fit) == PHGM_INVALID_ARGUMENT);

    phgm_fit_free(map);
    phgm_fit_free(fit);
    phgm_fit_free(back);
    phgm_dataset_free(d);
    for (auto* f : feats) phgm_features_free(f);
  }
}
