// Exercises the shared-library C surface end to end on a small network.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>

#include "netsynth.h"

namespace {
const char* kModelPath = "/tmp/netsynth_capi_model.txt";
const char* kCtrlPath = "/tmp/netsynth_capi_ctrl.txt";
}  // namespace

TEST_CASE("problem lifecycle through the C API") {
  netsynth_problem* p = nullptr;
  REQUIRE(netsynth_problem_example(2, 0.1823, 0.04, 0, &p) == NETSYNTH_OK);
  CHECK(netsynth_problem_agents(p) == 2);
  REQUIRE(netsynth_problem_save(p, kModelPath) == NETSYNTH_OK);

  netsynth_problem* p2 = nullptr;
  REQUIRE(netsynth_problem_load(kModelPath, &p2) == NETSYNTH_OK);
  CHECK(netsynth_problem_agents(p2) == 2);
  netsynth_problem_free(p2);
  netsynth_problem_free(p);

  netsynth_problem* p3 = nullptr;
  CHECK(netsynth_problem_load("/nonexistent/file", &p3) != NETSYNTH_OK);
  CHECK(std::string(netsynth_last_error()).size() > 0);
}

TEST_CASE("config keys") {
  netsynth_config* cfg = nullptr;
  REQUIRE(netsynth_config_create(&cfg) == NETSYNTH_OK);
  CHECK(netsynth_config_set(cfg, "penalty", "l1") == NETSYNTH_OK);
  CHECK(netsynth_config_set(cfg, "gamma", "0.25") == NETSYNTH_OK);
  CHECK(netsynth_config_set(cfg, "rho", "1000") == NETSYNTH_OK);
  CHECK(netsynth_config_set(cfg, "not_a_key", "1") == NETSYNTH_ERR);
  netsynth_config_free(cfg);
}

TEST_CASE("synthesis, analysis, robustness and simulation through the C API") {
  netsynth_problem* p = nullptr;
  REQUIRE(netsynth_problem_example(2, 0.1823, 0.04, 0, &p) == NETSYNTH_OK);

  netsynth_config* cfg = nullptr;
  REQUIRE(netsynth_config_create(&cfg) == NETSYNTH_OK);
  REQUIRE(netsynth_config_set(cfg, "penalty", "cardinality") == NETSYNTH_OK);
  REQUIRE(netsynth_config_set(cfg, "gamma", "0.05") == NETSYNTH_OK);
  REQUIRE(netsynth_config_set(cfg, "ico_max_iters", "4") == NETSYNTH_OK);
  REQUIRE(netsynth_config_set(cfg, "admm_max_iters", "6") == NETSYNTH_OK);

  netsynth_controller* ctrl = nullptr;
  REQUIRE(netsynth_synthesize(p, cfg, &ctrl) == NETSYNTH_OK);
  CHECK(netsynth_controller_nu(ctrl) > 0.0);
  CHECK(netsynth_controller_nonzero_blocks(ctrl) >= 4);
  REQUIRE(netsynth_controller_save(ctrl, kCtrlPath) == NETSYNTH_OK);
  CHECK(netsynth_controller_trace_csv(ctrl, "/tmp/netsynth_capi_trace.csv") ==
        NETSYNTH_OK);

  netsynth_controller* loaded = nullptr;
  REQUIRE(netsynth_controller_load(kCtrlPath, &loaded) == NETSYNTH_OK);
  CHECK(netsynth_controller_nu(loaded) == netsynth_controller_nu(ctrl));

  char report[512] = {0};
  REQUIRE(netsynth_analyze(p, loaded, report, sizeof(report)) == NETSYNTH_OK);
  CHECK(std::string(report).find("certified") != std::string::npos);

  REQUIRE(netsynth_robustness(p, loaded, nullptr, 4, 7,
                              "/tmp/netsynth_capi_mc.csv") == NETSYNTH_OK);
  REQUIRE(netsynth_simulate(p, loaded, "step", 1e-3, 2.0,
                            "/tmp/netsynth_capi_sim.csv") == NETSYNTH_OK);

  // csv files exist and carry the versioned headers
  for (const char* path : {"/tmp/netsynth_capi_mc.csv", "/tmp/netsynth_capi_sim.csv",
                           "/tmp/netsynth_capi_trace.csv"}) {
    std::FILE* f = std::fopen(path, "r");
    REQUIRE(f != nullptr);
    char line[256] = {0};
    CHECK(std::fgets(line, sizeof(line), f) != nullptr);
    CHECK(std::string(line).find("netsynth") != std::string::npos);
    std::fclose(f);
  }

  netsynth_controller_free(loaded);
  netsynth_controller_free(ctrl);
  netsynth_config_free(cfg);
  netsynth_problem_free(p);
}

TEST_CASE("simulate the open network") {
  netsynth_problem* p = nullptr;
  REQUIRE(netsynth_problem_example(2, 0.1823, 0.0, 0, &p) == NETSYNTH_OK);
  CHECK(netsynth_simulate(p, nullptr, "zero", 1e-2, 1.0,
                          "/tmp/netsynth_capi_open.csv") == NETSYNTH_OK);
  CHECK(netsynth_simulate(p, nullptr, "nonsense", 1e-2, 1.0,
                          "/tmp/netsynth_capi_bad.csv") == NETSYNTH_ERR);
  netsynth_problem_free(p);
}
