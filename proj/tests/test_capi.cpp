// Exercises the shared-library surface exactly as an external consumer would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "smim/smim.h"

namespace {
std::string take(char* s) {
  std::string out = s ? s : "";
  smim_string_free(s);
  return out;
}
}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(smim_version()) > 0);
  smim_link* link = nullptr;
  CHECK(smim_link_create("bogus(s=2)", &link) == SMIM_ERR_INVALID);
  CHECK(std::strlen(smim_last_error()) > 0);
  CHECK(smim_link_create(nullptr, &link) == SMIM_ERR_INVALID);
}

TEST_CASE("link handle") {
  smim_link* link = nullptr;
  REQUIRE(smim_link_create("mixture_parity(k0=1,k1=2,k2=3,p=0.3,sigma=0.1)", &link) == SMIM_OK);
  CHECK(smim_link_index_dim(link) == 4);
  CHECK(smim_link_label_arity(link) == 1);
  char* canon = nullptr;
  REQUIRE(smim_link_canonical(link, &canon) == SMIM_OK);
  CHECK(take(canon).find("mixture_parity") == 0);
  smim_link_destroy(link);
}

TEST_CASE("frames: round trip, distance, validation") {
  smim_frame* a = nullptr;
  REQUIRE(smim_frame_random(10, 2, 7, &a) == SMIM_OK);
  CHECK(smim_frame_dim(a) == 10);
  CHECK(smim_frame_rank(a) == 2);
  std::vector<double> buf(20);
  REQUIRE(smim_frame_data(a, buf.data()) == SMIM_OK);
  smim_frame* b = nullptr;
  REQUIRE(smim_frame_create(10, 2, buf.data(), &b) == SMIM_OK);
  double dist = -1;
  REQUIRE(smim_frame_distance(a, b, &dist) == SMIM_OK);
  CHECK(dist <= 1e-12);
  // non-orthonormal input rejected
  buf[0] += 0.5;
  smim_frame* c = nullptr;
  CHECK(smim_frame_create(10, 2, buf.data(), &c) == SMIM_ERR_INVALID);
  smim_frame_destroy(a);
  smim_frame_destroy(b);
}

TEST_CASE("dataset generate / save / load round trip") {
  smim_link* link = nullptr;
  REQUIRE(smim_link_create("parity(s=2,sigma=0.1)", &link) == SMIM_OK);
  smim_frame* w = nullptr;
  REQUIRE(smim_frame_random(12, 2, 3, &w) == SMIM_OK);
  smim_dataset* data = nullptr;
  REQUIRE(smim_dataset_generate(link, w, 200, 5, &data) == SMIM_OK);
  CHECK(smim_dataset_dim(data) == 12);
  CHECK(smim_dataset_size(data) == 200);
  CHECK(smim_dataset_arity(data) == 1);

  for (int binary : {0, 1}) {
    const std::string path = std::string("/tmp/smim_capi_ds") + (binary ? ".bin" : ".txt");
    REQUIRE(smim_dataset_save(data, path.c_str(), binary) == SMIM_OK);
    smim_dataset* back = nullptr;
    REQUIRE(smim_dataset_load(path.c_str(), &back) == SMIM_OK);
    CHECK(smim_dataset_size(back) == 200);
    CHECK(smim_dataset_dim(back) == 12);
    smim_dataset_destroy(back);
  }
  CHECK(smim_dataset_load("/nonexistent/x.smim", &data) == SMIM_ERR_IO);

  // deterministic regeneration
  smim_dataset* again = nullptr;
  REQUIRE(smim_dataset_generate(link, w, 200, 5, &again) == SMIM_OK);
  REQUIRE(smim_dataset_save(again, "/tmp/smim_capi_ds2.txt", 0) == SMIM_OK);
  smim_dataset_destroy(again);

  smim_dataset_destroy(data);
  smim_frame_destroy(w);
  smim_link_destroy(link);
}

TEST_CASE("estimate through the C API") {
  smim_link* link = nullptr;
  REQUIRE(smim_link_create("parity(s=2,sigma=0.1)", &link) == SMIM_OK);
  smim_frame* w = nullptr;
  REQUIRE(smim_frame_random(16, 2, 9, &w) == SMIM_OK);
  smim_dataset* data = nullptr;
  REQUIRE(smim_dataset_generate(link, w, 4000, 13, &data) == SMIM_OK);

  const char* opts =
      "estimator.degrees = 2\n"
      "estimator.kernel_cal = 10000\n"
      "planner.mc = 30000\n"
      "estimator.seed = 21\n";
  smim_frame* w_hat = nullptr;
  char* report_raw = nullptr;
  REQUIRE(smim_estimate(data, link, opts, w, &w_hat, &report_raw) == SMIM_OK);
  const auto report = nlohmann::json::parse(take(report_raw));
  CHECK(report["recovered_rank"].get<int>() == 2);
  CHECK(report["frame_distance"].get<double>() <= 0.4);
  double dist = -1;
  REQUIRE(smim_frame_distance(w_hat, w, &dist) == SMIM_OK);
  CHECK(dist == doctest::Approx(report["frame_distance"].get<double>()));

  smim_frame_destroy(w_hat);
  smim_dataset_destroy(data);
  smim_frame_destroy(w);
  smim_link_destroy(link);
}

TEST_CASE("complexity through the C API") {
  smim_link* link = nullptr;
  REQUIRE(smim_link_create("parity(s=2,sigma=0.1)", &link) == SMIM_OK);
  smim_frame* w = nullptr;
  REQUIRE(smim_frame_random(20, 2, 31, &w) == SMIM_OK);
  char* raw = nullptr;
  REQUIRE(smim_complexity(link, w, "planner.mc = 30000\nplanner.max_ell = 2\n", &raw) == SMIM_OK);
  const auto report = nlohmann::json::parse(take(raw));
  CHECK(report["sample"]["steps"][0]["ell"].get<int>() == 2);
  CHECK(report["query"]["steps"][0]["ell"].get<int>() == 2);

  char* sym = nullptr;
  REQUIRE(smim_complexity_symbolic("", &sym) == SMIM_OK);
  const auto symbolic = nlohmann::json::parse(take(sym));
  CHECK(symbolic["sample"]["total_cost_exponent"].get<std::string>() == "4 q");
  CHECK(symbolic["query"]["total_cost_exponent"].get<std::string>() == "7 q");

  smim_frame_destroy(w);
  smim_link_destroy(link);
}
