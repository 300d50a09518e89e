#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "drmcmc/chain_io.hpp"
#include "drmcmc/config.hpp"
#include "drmcmc/sampler.hpp"
#include "drmcmc/targets.hpp"

using namespace drmcmc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / (std::string("drmcmc_io_test_") + name);
}

nlohmann::json valid_config() {
    return nlohmann::json{
        {"schema_version", 1},
        {"target",
         {{"type", "gaussian_mixture"},
          {"weights", {0.5, 0.5}},
          {"centers", {-1.25, 1.25}},
          {"widths", {0.45, 0.45}}}},
        {"proposal",
         {{"dims", nlohmann::json::array({{{"type", "three_gaussian"},
                                           {"sigma1", 0.45},
                                           {"sigma2", 0.2},
                                           {"mu", 1.25},
                                           {"na", 0.15},
                                           {"nb", 0.95}}})},
          {"base_widths", {0.45}}}},
        {"run",
         {{"mode", "delayed_rejection"},
          {"n_iterations", 100},
          {"p_dr", 0.001},
          {"n_dr", 10},
          {"seed", 7},
          {"initial", {0.0}}}},
        {"output", {{"chain_csv", "c.csv"}, {"summary_json", "s.json"}}}};
}

}  // namespace

TEST_CASE("doubles survive a text round trip bit-exactly") {
    Rng rng(71);
    std::uniform_real_distribution<double> mag(-300.0, 300.0);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double v = mant(rng) * std::pow(10.0, static_cast<int>(mag(rng)) / 3);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(format_double(0.0)) == 0.0);
    CHECK(parse_double(format_double(0.1)) == 0.1);
    CHECK(parse_double(format_double(-std::numeric_limits<double>::max())) ==
          -std::numeric_limits<double>::max());
    CHECK_THROWS(parse_double("not-a-number"));
}

TEST_CASE("chain CSV round trip preserves every field") {
    Chain chain;
    chain.states = {{0.1, -2.5}, {0.30000000000000004, 1e-17}, {-7.0, 3.25}};
    chain.records.resize(2);
    chain.records[0].accepted = true;
    chain.records[0].dr_stage = 4;
    chain.records[0].target_evals = 5;
    chain.records[1].accepted = false;
    chain.records[1].dr_stage = std::nullopt;
    chain.records[1].target_evals = 1;
    chain.total_target_evals = 6;

    fs::path path = temp_file("roundtrip.csv");
    write_chain_csv(path, chain);
    Chain back = read_chain_csv(path);

    REQUIRE(back.states.size() == chain.states.size());
    for (std::size_t i = 0; i < chain.states.size(); ++i) CHECK(back.states[i] == chain.states[i]);
    REQUIRE(back.records.size() == chain.records.size());
    CHECK(back.records[0].accepted == true);
    CHECK(back.records[0].dr_stage == 4);
    CHECK(back.records[0].target_evals == 5);
    CHECK(back.records[1].accepted == false);
    CHECK(!back.records[1].dr_stage.has_value());
    CHECK(back.total_target_evals == 6);
    fs::remove(path);
}

TEST_CASE("chain CSV starts with a schema line and rejects foreign files") {
    Chain chain;
    chain.states = {{1.0}};
    std::string csv = chain_to_csv(chain);
    CHECK(csv.rfind(std::string("# ") + kChainSchema, 0) == 0);

    fs::path path = temp_file("bad_schema.csv");
    {
        std::ofstream f(path);
        f << "# some-other-format v9\niteration,x0\n0,1.0\n";
    }
    CHECK_THROWS(read_chain_csv(path));
    fs::remove(path);
}

TEST_CASE("atomic write replaces content and leaves no temp files behind") {
    fs::path path = temp_file("atomic.txt");
    atomic_write(path, "first");
    atomic_write(path, "second");
    std::ifstream f(path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(content == "second");
    int leftovers = 0;
    for (const auto& e : fs::directory_iterator(path.parent_path()))
        if (e.path().filename().string().rfind("drmcmc_io_test_atomic.txt.", 0) == 0) ++leftovers;
    CHECK(leftovers == 0);
    fs::remove(path);
}

TEST_CASE("string hashing is stable and collision-sensitive") {
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == fnv1a("a"));
    CHECK(fnv1a("a") != fnv1a("b"));
    CHECK(fnv1a("ab") != fnv1a("ba"));
}

TEST_CASE("experiment config parsing") {
    SUBCASE("accepts a complete config") {
        auto cfg = parse_experiment_config(valid_config());
        CHECK(cfg.chain.mode == ChainMode::delayed_rejection);
        CHECK(cfg.chain.n_iterations == 100);
        CHECK(cfg.chain.p_dr == 0.001);
        CHECK(cfg.chain.n_dr == 10);
        CHECK(cfg.chain.seed == 7);
        CHECK(cfg.out_chain == "c.csv");
        CHECK(cfg.out_summary == "s.json");
    }

    SUBCASE("single-letter mode aliases work") {
        auto j = valid_config();
        j["run"]["mode"] = "A";
        j["run"]["p_bj"] = 0.001;
        CHECK(parse_experiment_config(j).chain.mode == ChainMode::baseline_rare_jump);
        j["run"]["mode"] = "b";
        CHECK(parse_experiment_config(j).chain.mode == ChainMode::baseline_frequent_jump);
    }

    SUBCASE("unknown keys are rejected and named") {
        auto j = valid_config();
        j["run"]["typo_key"] = 1;
        try {
            parse_experiment_config(j);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.keys.size() == 1);
            CHECK(e.keys[0] == "run.typo_key");
        }
    }

    SUBCASE("missing keys are rejected and named") {
        auto j = valid_config();
        j["run"].erase("seed");
        try {
            parse_experiment_config(j);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.keys.size() == 1);
            CHECK(e.keys[0] == "run.seed");
        }
    }

    SUBCASE("wrong schema version is rejected") {
        auto j = valid_config();
        j["schema_version"] = 2;
        CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    }

    SUBCASE("bad value types are rejected") {
        auto j = valid_config();
        j["run"]["n_iterations"] = "many";
        CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    }

    SUBCASE("unknown target and proposal types are rejected") {
        auto j = valid_config();
        j["target"] = {{"type", "cauchy_comb"}};
        CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
        j = valid_config();
        j["proposal"]["dims"][0]["type"] = "levy";
        CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    }

    SUBCASE("semantic validation still applies after parsing") {
        auto j = valid_config();
        j["run"]["p_dr"] = 1.5;
        CHECK_THROWS(parse_experiment_config(j));
    }
}

TEST_CASE("config hash tracks content, not formatting") {
    auto a = valid_config();
    auto b = valid_config();
    CHECK(config_hash(a) == config_hash(b));
    b["run"]["seed"] = 8;
    CHECK(config_hash(a) != config_hash(b));
    // Key order does not matter: nlohmann::json stores objects sorted.
    nlohmann::json c = nlohmann::json::parse(R"({"x": 1, "a": 2})");
    nlohmann::json d = nlohmann::json::parse(R"({"a": 2, "x": 1})");
    CHECK(config_hash(c) == config_hash(d));
}
