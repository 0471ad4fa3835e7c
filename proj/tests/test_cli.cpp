#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using gfl::cli::run;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_rows(const fs::path &csv) {
    std::istringstream in(slurp(csv));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        ++n;
    return n == 0 ? 0 : n - 1;
}

std::string fresh_dir(const std::string &name) {
    const fs::path d = fs::path("cli_test_out") / name;
    fs::remove_all(d);
    return d.string();
}

json load(const fs::path &p) { return json::parse(slurp(p)); }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("sha256") {
    CHECK(gfl::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("simulate writes the requested rows and a consistent manifest") {
    const auto out = fresh_dir("sim");
    REQUIRE(run({"--out", out, "--seed", "7", "simulate", "--n", "1000", "--s", "31.6", "--horizon", "100"}) == 0);
    CHECK(data_rows(fs::path(out) / "trajectory.csv") == 100);
    const auto m = load(fs::path(out) / "manifest.json");
    CHECK(m["command"] == "simulate");
    CHECK(m["master_seed"] == 7);
    CHECK(m["config_digest"] == gfl::cli::sha256_hex(m["config"].dump()));
    REQUIRE(m["outputs"].size() == 1);
    CHECK(m["outputs"][0]["sha256"] == gfl::cli::sha256_hex(slurp(fs::path(out) / "trajectory.csv")));
}

TEST_CASE("usage errors exit with 2") {
    const auto out = fresh_dir("usage");
    CHECK(run({"--out", out, "simulate", "--s", "1", "--horizon", "10"}) == 2);
    CHECK(run({"--out", out, "simulate", "--n", "1", "--s", "1", "--horizon", "10"}) == 2);
    CHECK(run({"--out", out, "simulate", "--n", "100", "--s", "1", "--horizon", "0"}) == 2);
    CHECK(run({"--out", out, "frobnicate"}) == 2);
    CHECK(run({"--out", out, "simulate", "--bogus"}) == 2);
    CHECK(run({"--out", out, "--config", "no_such_file.json", "compare"}) == 2);
    CHECK(run({"--out", out, "compare", "--n", "1000", "--s", "10", "--horizon", "2000", "--burn-in", "100",
               "--replications", "1"}) == 2);
    CHECK(run({"--out", out, "crlb", "--n", "100"}) == 2);
    CHECK(run({"--out", out, "rates", "--kind", "variance"}) == 2);
    CHECK(run({"--out", out, "compare", "--n", "1000", "--s", "10", "--horizon", "2000", "--burn-in", "100",
               "--replications", "2", "--filters", "kf,ekf"}) == 2);
}

TEST_CASE("simulate is byte-identical across runs") {
    const auto a = fresh_dir("sim_a"), b = fresh_dir("sim_b");
    const std::vector<std::string> args{"simulate", "--n", "1000", "--s", "31.6", "--horizon", "500", "--obs", "logistic"};
    auto with = [&](const std::string &dir) {
        std::vector<std::string> v{"--out", dir, "--seed", "7"};
        v.insert(v.end(), args.begin(), args.end());
        return v;
    };
    REQUIRE(run(with(a)) == 0);
    REQUIRE(run(with(b)) == 0);
    CHECK(slurp(fs::path(a) / "trajectory.csv") == slurp(fs::path(b) / "trajectory.csv"));
}

TEST_CASE("compare: logistic balanced config favours the score filter") {
    const auto out = fresh_dir("cmp_logistic");
    const int rc = run({"--out", out, "--seed", "3", "compare", "--n", "1000", "--s", "31.6", "--horizon", "60000",
                        "--burn-in", "10000", "--replications", "60", "--obs", "logistic", "--filters",
                        "kf,gf,trivial_mean,trivial_obs"});
    CHECK(rc == 0);
    const auto v = load(fs::path(out) / "verdict.json");
    CHECK(v["gf_beats_kf"] == true);
    CHECK(v["gf_equals_kf"] == false);
    CHECK(v["regime"] == "balanced");
    CHECK(data_rows(fs::path(out) / "compare.csv") == 4);
    const auto m = load(fs::path(out) / "manifest.json");
    CHECK(m["outputs"].size() == 2);
    CHECK(m["config"]["replications"] == 60);
}

TEST_CASE("compare: Gaussian config makes the two filters identical") {
    const auto out = fresh_dir("cmp_gauss");
    CHECK(run({"--out", out, "--seed", "4", "compare", "--n", "1000", "--s", "10", "--horizon", "5000", "--burn-in",
               "500", "--replications", "4", "--obs", "gaussian"}) == 0);
    CHECK(load(fs::path(out) / "verdict.json")["gf_equals_kf"] == true);
}

TEST_CASE("compare accepts a config file and lets flags override it") {
    const auto out = fresh_dir("cmp_cfg");
    fs::create_directories(out);
    const auto cfg = (fs::path(out) / "cfg.json").string();
    {
        std::ofstream os(cfg);
        os << R"({"N": 1000, "s_N": 10, "horizon": 3000, "burn_in": 300, "replications": 3,
                  "filters": ["kf", "gf", "cgf", "naive_batch:10"], "seed": 5})";
    }
    CHECK(run({"--out", out, "--config", cfg, "compare", "--replications", "2"}) == 0);
    const auto m = load(fs::path(out) / "manifest.json");
    CHECK(m["config"]["replications"] == 2);
    CHECK(m["config"]["seed"] == 5);
    CHECK(data_rows(fs::path(out) / "compare.csv") == 4);
}

TEST_CASE("crlb resolves tau = auto to round(s)") {
    const auto out = fresh_dir("crlb");
    REQUIRE(run({"--out", out, "crlb", "--n", "10000", "--s", "100", "--tau", "auto"}) == 0);
    std::istringstream in(slurp(fs::path(out) / "crlb.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "N,s_N,tau,barJ_inf,lower_bound,unbatched_bound,J_gf,J_kf,rel_gap");
    CHECK(row.rfind("10000,100,100,", 0) == 0);
    REQUIRE(run({"--out", out, "crlb", "--n", "100,1000", "--s", "1,2,3"}) == 0);
    CHECK(data_rows(fs::path(out) / "crlb.csv") == 6);
}

TEST_CASE("fisher-clt writes one row per tau") {
    const auto out = fresh_dir("fisher");
    REQUIRE(run({"--out", out, "fisher-clt", "--model", "logistic", "--taus", "4,8,16,32"}) == 0);
    CHECK(data_rows(fs::path(out) / "fisher_clt.csv") == 4);
    CHECK(run({"--out", out, "fisher-clt", "--taus", "8,4"}) == 2);
}

TEST_CASE("regimes with defaults writes 44 rows") {
    const auto out = fresh_dir("regimes");
    REQUIRE(run({"--out", out, "regimes"}) == 0);
    CHECK(data_rows(fs::path(out) / "regimes.csv") == 44);
    const auto s = load(fs::path(out) / "regimes.json");
    CHECK(s["rows"] == 44);
    CHECK(s["labels_monotone_in_s"] == true);
    CHECK(s["gf_le_kf_in_balanced"] == true);
}

TEST_CASE("rates runs a small fit") {
    const auto out = fresh_dir("rates");
    REQUIRE(run({"--out", out, "--seed", "1", "rates", "--n", "100,200,400", "--replications", "3",
                 "--horizon-factor", "20", "--kind", "mse_gap", "--filter", "cgf", "--s-rule", "fixed:3"}) == 0);
    CHECK(data_rows(fs::path(out) / "rates.csv") == 3);
}

}
