#include <string>

#include "doctest.h"
#include "json.hpp"
#include "process.hpp"

namespace {

const std::string kCli = JVIP_CLI_PATH;
const std::string kData = JVIP_TEST_DATA;
const std::string kManifest = kData + "/lalonde_like.json";
const std::string kPostManifest = kData + "/lalonde_like_post.json";

fixture::RunResult cli(const std::vector<std::string>& args) { return fixture::run(kCli, args); }

// Writes a one-covariate study whose pilot has a treated row.
std::string treated_pilot_manifest(const fixture::TempDir& dir) {
  fixture::spit(dir / "pilot.csv", "treat,y,x\n0,1,0\n1,2,1\n0,4,2\n");
  fixture::spit(dir / "analysis.csv", "treat,y,x\n1,1,1\n0,1,2\n");
  fixture::spit(dir / "study.json",
                R"({"pilot_csv":"pilot.csv","analysis_csv":"analysis.csv",)"
                R"("treatment":"treat","outcome":"y","covariates":["x"]})");
  return (dir / "study.json").string();
}

}  // namespace

TEST_CASE("compute prints model JSON") {
  const auto r = cli({"compute", "--manifest", kManifest});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.back() == '\n');
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("covariates").size() == 8);
  CHECK(j.at("n_pilot") == 400);
  CHECK(j.at("n_treated") == 185);
  CHECK(j.at("n_control") == 1600);
  CHECK(cli({"compute", "--manifest", kManifest}).out == r.out);
}

TEST_CASE("--smd changes only the flavor-selected fields") {
  const auto cross = nlohmann::json::parse(cli({"compute", "--manifest", kManifest}).out);
  const auto pure =
      nlohmann::json::parse(cli({"compute", "--manifest", kManifest, "--smd", "pure"}).out);
  const auto diff = nlohmann::json::diff(cross, pure);
  REQUIRE_FALSE(diff.empty());
  for (const auto& op : diff) {
    const std::string path = op.at("path");
    const bool flavor_field = path.ends_with("/smd") || path.ends_with("/bias");
    CHECK_MESSAGE(flavor_field, path);
  }
}

TEST_CASE("summary and print") {
  const auto s = cli({"summary", "--manifest", kManifest});
  REQUIRE(s.exit_code == 0);
  CHECK(s.out.find("2 variables are above the desired 0.01 absolute bias tolerance\n") !=
        std::string::npos);
  CHECK(s.out.find("8 variables can be plotted\n") != std::string::npos);

  const auto loose = cli({"summary", "--manifest", kManifest, "--bias-tol", "1.0"});
  CHECK(loose.out.find("0 variables are above the desired 1 absolute bias tolerance") !=
        std::string::npos);

  const auto post = cli({"summary", "--manifest", kPostManifest, "--post-bias-tol", "0.005"});
  REQUIRE(post.exit_code == 0);
  CHECK(post.out.find("\n\nMax absolute post-bias is ") != std::string::npos);
  CHECK(post.out.find(" variable(s) above the desired 0.005 absolute bias tolerance\n") !=
        std::string::npos);

  const auto p = cli({"print", "--manifest", kManifest});
  REQUIRE(p.exit_code == 0);
  CHECK(p.out.rfind("          bias\nlog_re75 ", 0) == 0);
  CHECK(p.out.find("\nlog_re74 ") != std::string::npos);

  const auto signed_print = cli({"print", "--manifest", kManifest, "--signed"});
  CHECK(signed_print.out.find("log_re75 -") != std::string::npos);
}

TEST_CASE("plot writes deterministic SVG") {
  fixture::TempDir dir("cli_plot");
  const auto a = (dir / "a.svg").string();
  const auto b = (dir / "b.svg").string();
  REQUIRE(cli({"plot", "--manifest", kManifest, "--out", a}).exit_code == 0);
  REQUIRE(cli({"plot", "--manifest", kManifest, "--out", b}).exit_code == 0);
  const auto svg = fixture::slurp(a);
  CHECK(svg == fixture::slurp(b));
  std::size_t n = 0;
  for (auto pos = svg.find("class=\"point-pre\""); pos != std::string::npos;
       pos = svg.find("class=\"point-pre\"", pos + 1)) {
    ++n;
  }
  CHECK(n == 8);

  const auto post = (dir / "post.svg").string();
  REQUIRE(cli({"plot", "--manifest", kPostManifest, "--trails", "--out", post}).exit_code == 0);
  const auto post_svg = fixture::slurp(post);
  CHECK(post_svg.find("class=\"point-post\"") != std::string::npos);
  CHECK(post_svg.find("class=\"trail\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  fixture::TempDir dir("cli_exit");
  const auto treated = cli({"compute", "--manifest", treated_pilot_manifest(dir)});
  CHECK(treated.exit_code == 2);
  const auto err = nlohmann::json::parse(treated.err);
  CHECK(err.at("code") == "TreatedInPilot");
  CHECK(err.at("detail").at("count") == 1);
  CHECK(treated.out.empty());

  const auto missing = cli({"compute", "--manifest", (dir / "missing.json").string()});
  CHECK(missing.exit_code == 3);
  CHECK(nlohmann::json::parse(missing.err).at("code") == "IoError");

  const auto unwritable =
      cli({"plot", "--manifest", kManifest, "--out", (dir / "no/such/dir/x.svg").string()});
  CHECK(unwritable.exit_code == 3);

  CHECK(cli({}).exit_code == 4);
  CHECK(cli({"compute"}).exit_code == 4);
  CHECK(cli({"bogus"}).exit_code == 4);
  CHECK(cli({"summary", "--manifest", kManifest, "--smd", "standard"}).exit_code == 4);
  CHECK(cli({"summary", "--manifest", kManifest, "--bias-tol", "-1"}).exit_code == 4);
  CHECK(cli({"serve", "--serve-addr", "nocolon"}).exit_code == 4);
  CHECK(cli({"--help"}).exit_code == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
  fixture::TempDir dir("cli_out");
  const auto path = (dir / "model.json").string();
  REQUIRE(cli({"compute", "--manifest", kPostManifest, "--out", path}).exit_code == 0);
  CHECK(fixture::slurp(path) == cli({"compute", "--manifest", kPostManifest}).out);
  CHECK(nlohmann::json::parse(fixture::slurp(path)).contains("post_covariates"));
}
