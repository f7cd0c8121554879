#include "fairsel/cli.hpp"
#include "fairsel/dataio.hpp"
#include "fairsel/fairness.hpp"
#include "fairsel/micp.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fairsel;
using cli::Json;

namespace {

std::string tmp(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "fairsel_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string synth_file() {
    cli::Options o;
    o.out = tmp("g.csv");
    o.seed = 7;
    cli::cmd_synth(o);
    return o.out;
}

Json fit_config() {
    return Json{{"data", synth_file()}, {"schema", tmp("g.csv.schema.json")}, {"t", 1.0}, {"lambda", 0.01},
                {"rho", 0.2},          {"test_ratio", 0.3},                   {"seed", 4}};
}

std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_with(const Json& config, const std::string& cmd, std::string& err, cli::Options o = {}) {
    o.config = tmp(cmd + ".json");
    std::ofstream(o.config) << config.dump();
    std::ostringstream out, e;
    int rc = cli::run(cmd, o, out, e);
    err = e.str();
    return rc;
}

}  // namespace

TEST_CASE("fit: synthetic file feeds fit and the metrics are deterministic") {
    auto c = fit_config();
    auto a = cli::cmd_fit(c, {});
    auto b = cli::cmd_fit(c, {});
    CHECK(a["metrics"].dump() == b["metrics"].dump());
    CHECK(a["metrics"]["test"]["accuracy"].get<double>() > 0.5);
    CHECK(a["env"].contains("wall_ms"));
    CHECK_FALSE(a["metrics"].contains("wall_ms"));
}

TEST_CASE("fit: reported fairness is the plug-in value of the returned model") {
    auto c = fit_config();
    c["rho"] = 0.0;
    c.erase("test_ratio");
    auto doc = cli::cmd_fit(c, {});
    auto d = load_csv(tmp("g.csv"), Schema::from_file(tmp("g.csv.schema.json")));
    LinearModel m{doc["metrics"]["w"].get<std::vector<double>>(), doc["metrics"]["b"].get<double>()};
    auto z = correctness(predict(m, d.features), d.labels);
    CHECK(doc["metrics"]["train"]["fairness"].get<double>() == omr(z, FairnessSpec::build(d, FairnessKind::OMR)));
}

TEST_CASE("grid: row count and the single-cell case") {
    auto c = fit_config();
    c["t"] = Json::array({0.5, 1.0});
    c["lambda"] = Json::array({0.1});
    c["rho"] = Json::array({0.0, 0.2, 1.0});
    c["folds"] = 2;
    c.erase("test_ratio");
    cli::Options o;
    o.out = tmp("grid.csv");
    o.threads = 2;
    auto doc = cli::cmd_grid(c, o);
    auto t = read_csv_file(o.out);
    CHECK(t.rows.size() == 2 * 1 * 3 * 2);
    CHECK(doc["metrics"]["rows"] == 12);

    auto one = fit_config();
    auto fit = cli::cmd_fit(one, {});
    cli::cmd_grid(one, o);
    auto row = read_csv_file(o.out);
    REQUIRE(row.rows.size() == 1);
    CHECK(std::stod(row.rows[0][row.column("objective")]) == fit["metrics"]["objective"].get<double>());
    CHECK(std::stod(row.rows[0][row.column("eval_accuracy")]) ==
          fit["metrics"]["test"]["accuracy"].get<double>());
}

TEST_CASE("grid output does not depend on the thread count") {
    auto c = fit_config();
    c["lambda"] = Json::array({0.05, 0.1, 0.5});
    c["rho"] = Json::array({0.0, 0.5});
    cli::Options o;
    o.out = tmp("g1.csv");
    o.threads = 1;
    cli::cmd_grid(c, o);
    auto single = slurp(o.out);
    o.threads = 3;
    o.out = tmp("g3.csv");
    cli::cmd_grid(c, o);
    CHECK(slurp(o.out) == single);
}

TEST_CASE("select: scores file in, selection file out") {
    auto scores = tmp("scores.csv");
    std::ofstream(scores) << "index,u,y,g\n0,0.5,1,1\n1,2.0,-1,1\n2,0.1,1,-1\n3,0.9,-1,-1\n";
    cli::Options o;
    o.out = tmp("z.csv");
    auto doc = cli::cmd_select(Json{{"scores", scores}, {"t", 1.0}, {"rho", 0.0}}, o);
    auto t = read_csv_file(o.out);
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0][1] == "1");
    CHECK(t.rows[1][1] == "0");
    CHECK(doc["metrics"]["value"].get<double>() == doctest::Approx((-0.5 - 0.9 - 0.1) / 4));
    CHECK(doc["env"].contains("select_ms"));
}

TEST_CASE("export-micp writes a model that reads back") {
    auto c = fit_config();
    c.erase("test_ratio");
    c.erase("seed");
    cli::Options o;
    o.out = tmp("model.json");
    auto doc = cli::cmd_export_micp(c, o);
    auto m = micp_from_json(slurp(o.out));
    CHECK(m.vars.size() == doc["metrics"]["vars"].get<std::size_t>());
    o.out = tmp("model.lp");
    cli::cmd_export_micp(c, o);
    CHECK(slurp(o.out).find("Binaries") != std::string::npos);
}

TEST_CASE("oracle-check reports matches") {
    auto doc = cli::cmd_oracle_check(Json{{"n", 8}, {"seeds", 3}, {"rho", 0.3}}, {});
    CHECK(doc["metrics"]["summary"] == "3/3 match");
}

TEST_CASE("exit codes separate config, data and protocol failures") {
    std::string err;
    CHECK(run_with(Json{{"t", "high"}, {"lambda", -1}, {"nope", 1}}, "fit", err) == cli::kConfig);
    CHECK(err.find("nope") != std::string::npos);
    CHECK(err.find("lambda") != std::string::npos);

    auto bad = tmp("bad.csv");
    std::ofstream(bad) << "x1,label,group\n1,1,1\n2,-1,-1\n";
    Json c{{"data", bad}, {"schema", Json{{"label_col", "y"}, {"positive_label", "1"}, {"group_col", "group"},
                                          {"positive_group", "1"}}}};
    CHECK(run_with(c, "fit", err) == cli::kData);

    auto bb = fit_config();
    bb.erase("test_ratio");
    bb["timeout_ms"] = 2000;
    cli::Options o;
    o.blackbox = std::string(MOCK_SCORER) + " short";
    CHECK(run_with(bb, "fit", err, o) == cli::kProtocol);
    CHECK(run_with(Json::object(), "frobnicate", err) == cli::kConfig);
}
