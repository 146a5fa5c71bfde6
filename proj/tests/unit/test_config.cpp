#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "exante/config.hpp"
#include "exante/error.hpp"
#include "exante/pipeline.hpp"

using namespace exante;

namespace {

std::string read(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const std::string& name) {
    RunConfig c = load_config(std::filesystem::path(EXANTE_SOURCE_DIR) / "configs/default.json");
    c.out_dir = std::filesystem::temp_directory_path() / ("exante_ut_" + name);
    std::filesystem::remove_all(c.out_dir);
    c.dgp.respondents = 400;
    c.dgp.oracle_draws = 2000;
    c.thresholds.n = 20;
    c.bootstrap = 0;
    c.returns.s_step = 20;
    c.canonical = config_to_json(c);
    return c;
}

}  // namespace

TEST(Config, DefaultFileParses) {
    const RunConfig c = load_config(std::filesystem::path(EXANTE_SOURCE_DIR) / "configs/default.json");
    EXPECT_EQ(c.design.size(), 6u);
    ASSERT_TRUE(c.returns.shift.has_value());
    EXPECT_EQ(c.returns.shift->attribute, Attribute::layoff_pub);
    EXPECT_EQ(c.policy.schemes.size(), 4u);
    EXPECT_EQ(c.x_tilde.size(), 1u);
}

TEST(Config, UnknownKeyRejected) {
    EXPECT_THROW(parse_config(R"({"seed": 1, "bootstrapp": 3})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"returns": {"copula": "gumbel"}})"), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, HashIgnoresOutDirButTracksSeed) {
    RunConfig a = parse_config(R"({"seed": 3, "out_dir": "a"})");
    RunConfig b = parse_config(R"({"seed": 3, "out_dir": "b"})");
    RunConfig c = parse_config(R"({"seed": 4, "out_dir": "a"})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(sha256_hex("abc"),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, CanonicalJsonRoundTrips) {
    const RunConfig c = load_config(std::filesystem::path(EXANTE_SOURCE_DIR) / "configs/default.json");
    const RunConfig back = parse_config(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Pipeline, UnknownCommand) {
    std::ostringstream log;
    EXPECT_THROW(run_command("plot", small_config("unknown"), log), ConfigError);
}

TEST(Pipeline, CurvesNeedFit) {
    std::ostringstream log;
    try {
        run_command("curves", small_config("nofit"), log);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("fit required"), std::string::npos);
    }
}

TEST(Pipeline, ArtifactsCarryHashAndAreDeterministic) {
    std::vector<std::vector<Artifact>> manifests;
    for (const char* name : {"run1", "run2"}) {
        const RunConfig c = small_config(name);
        std::ostringstream log;
        for (const char* cmd : {"simulate", "fit", "curves", "policy"}) run_command(cmd, c, log);
        const auto m = read_manifest(c.out_dir);
        ASSERT_FALSE(m.empty());
        const std::string hash = config_hash(c);
        for (const auto& a : m) {
            const std::string text = read(c.out_dir / a.path);
            EXPECT_EQ(sha256_hex(text), a.sha256) << a.path;
            EXPECT_NE(text.find(hash), std::string::npos) << a.path;
        }
        manifests.push_back(m);
    }
    ASSERT_EQ(manifests[0].size(), manifests[1].size());
    for (std::size_t i = 0; i < manifests[0].size(); ++i) {
        EXPECT_EQ(manifests[0][i].path, manifests[1][i].path);
        EXPECT_EQ(manifests[0][i].sha256, manifests[1][i].sha256);
    }
}
