#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace eigenpaths;

namespace {

const std::string kSamples = SAMPLES_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("eigenpaths_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run(std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_input(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("eigenpaths_cli_input_" + name + ".json");
    std::ofstream(p) << text;
    return p.string();
}

const std::string kFast = kSamples + "/config_fast.json";

}  // namespace

TEST(Cli, TrackWritesAllFormats) {
    const auto out = scratch("track");
    ASSERT_EQ(run({"track", "--input", kSamples + "/crossing.json", "--out", out.string()}), cli::kOk);
    for (const char* f : {"eigenpaths.csv", "ambiguities.json", "eigenpaths_re.svg", "eigenpaths_im.svg"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const Json a = io::parse_json(slurp(out / "ambiguities.json"));
    EXPECT_EQ(a["ambiguity_count"], 1);
    EXPECT_NEAR(a["ambiguities"][0]["alpha"].get<double>(), 0.5, 1e-9);
}

TEST(Cli, FormatSelectsOutputs) {
    const auto out = scratch("format");
    ASSERT_EQ(run({"track", "--input", kSamples + "/constant.json", "--out", out.string(), "--format", "csv"}), cli::kOk);
    EXPECT_TRUE(fs::exists(out / "eigenpaths.csv"));
    EXPECT_FALSE(fs::exists(out / "ambiguities.json"));
    EXPECT_FALSE(fs::exists(out / "eigenpaths_re.svg"));
    EXPECT_EQ(run({"track", "--input", kSamples + "/constant.json", "--out", out.string(), "--format", "pdf"}),
              cli::kParse);
}

TEST(Cli, SameSeedGivesIdenticalBytes) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& dir : {a, b}) {
        ASSERT_EQ(run({"rip", "--input", kSamples + "/rip_crossing.json", "--out", dir.string(), "--seed", "7", "--config",
                       kFast}),
                  cli::kOk);
        ASSERT_EQ(run({"perturb", "--input", kSamples + "/perturb_crossing.json", "--out", dir.string(), "--seed", "7",
                       "--trials", "5"}),
                  cli::kOk);
    }
    for (const auto& entry : fs::directory_iterator(a))
        EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
}

TEST(Cli, ClassifyUnitRatioInstanceIsPOnly) {
    const auto out = scratch("classify");
    ASSERT_EQ(run({"classify2x2", "--input", kSamples + "/classify_p_only.json", "--out", out.string()}), cli::kOk);
    const Json v = io::parse_json(slurp(out / "verdict.json"));
    EXPECT_EQ(v["verdict"], "P_only");
    EXPECT_EQ(v["tracker_agrees"], true);
}

TEST(Cli, RipOfAmbiguityFreeInputIsIdentity) {
    const auto out = scratch("rip_id");
    ASSERT_EQ(run({"rip", "--input", kSamples + "/rip_unchanged.json", "--out", out.string(), "--eps", "0.5"}), cli::kOk);
    const Json r = io::parse_json(slurp(out / "rip.json"));
    EXPECT_EQ(r["unchanged"], true);
    const MatrixPath p = io::path_from_json(io::parse_json(slurp(out / "new_path.json")));
    EXPECT_TRUE(p.is_convex());
}

TEST(Cli, PerturbCrossingHundredTrials) {
    const auto out = scratch("perturb");
    ASSERT_EQ(run({"perturb", "--input", kSamples + "/perturb_crossing.json", "--out", out.string(), "--trials", "100"}),
              cli::kOk);
    const Json s = io::parse_json(slurp(out / "perturb.json"));
    EXPECT_EQ(s["witnesses"], 100);
    std::istringstream csv(slurp(out / "perturb.csv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 101u);
}

TEST(Cli, ExitCodes) {
    const auto out = scratch("codes");
    EXPECT_EQ(run({"track", "--input", write_input("syntax", "{\"kind\": ,}"), "--out", out.string()}), cli::kParse);
    EXPECT_EQ(run({"track", "--input", write_input("schema", R"({"kind":"convex","A":[[1]]})"), "--out", out.string()}),
              cli::kParse);
    EXPECT_EQ(run({"track", "--out", out.string()}), cli::kParse);
    EXPECT_EQ(run({"--input", kSamples + "/crossing.json"}), cli::kParse);
    const std::string wrong = write_input("expect", R"({"path":{"kind":"convex","A":[[1,0],[0,-1]],"B":[[-1,0],[0,1]]},
        "expect":{"ambiguity_count":0}})");
    EXPECT_EQ(run({"track", "--input", wrong, "--out", out.string()}), cli::kAssertion);
    EXPECT_EQ(run({"rip", "--input", kSamples + "/crossing.json", "--out", out.string(), "--eps", "1e-9"}),
              cli::kNumerical);
    const std::string bad_key = write_input("badcfg", R"({"no_such_key": 1})");
    EXPECT_EQ(run({"track", "--input", kSamples + "/crossing.json", "--out", out.string(), "--config", bad_key}),
              cli::kParse);
}

TEST(Cli, EverySampleMeetsItsExpectations) {
    const std::vector<std::pair<std::string, std::string>> runs{
        {"track", "crossing"},          {"track", "both_instance"},    {"track", "constant"},
        {"classify2x2", "classify_both"}, {"polytrack", "poly_collision"}, {"reduce", "reduce_matrix"},
        {"reduce", "reduce_poly"}};
    for (const auto& [cmd, name] : runs) {
        const auto out = scratch("sample_" + name);
        EXPECT_EQ(run({cmd, "--input", kSamples + "/" + name + ".json", "--out", out.string(), "--config", kFast}),
                  cli::kOk)
            << name;
    }
}
