#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "hepchain/io.hpp"

using namespace hepchain;

namespace {

struct Cli {
    int code = 0;
    std::string out, err;
};

Cli cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "hepchain");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Cli r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class CliRun : public ::testing::Test {
  protected:
    static void SetUpTestSuite()
    {
        dir_ = std::filesystem::temp_directory_path() / "hepchain_cli_test";
        std::filesystem::remove_all(dir_);
        const auto r = cli({"run", "--scenario", std::string(HEPCHAIN_SOURCE_DIR) + "/scenarios/default.yaml",
                            "--seed", "1", "--out", dir_.string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() { std::filesystem::remove_all(dir_); }

    static std::string chain() { return (dir_ / "chain.jsonl").string(); }

    static std::filesystem::path dir_;
};

std::filesystem::path CliRun::dir_;

} // namespace

TEST_F(CliRun, RunWritesAllOutputs)
{
    for (const char* f : {"chain.jsonl", "metrics.csv", "summary.json"})
        EXPECT_TRUE(std::filesystem::exists(dir_ / f)) << f;
}

TEST_F(CliRun, VerifyChainAcceptsOriginal)
{
    const auto r = cli({"verify-chain", "--chain", chain()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("OK height 20", 0), 0u) << r.out;
}

TEST_F(CliRun, VerifyChainNamesTamperedHeight)
{
    std::ifstream in(chain());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 22u);
    // line 0 is the header, line k+1 holds block k
    auto block = nlohmann::json::parse(lines[9]);
    block["winner"] = Address::from_label("intruder").to_hex();
    lines[9] = block.dump();
    const auto tampered = (dir_ / "tampered.jsonl").string();
    std::ofstream out(tampered);
    for (const auto& l : lines) out << l << "\n";
    out.close();

    const auto r = cli({"verify-chain", "--chain", tampered});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("height 8"), std::string::npos) << r.out;
}

TEST_F(CliRun, ReplayBalancesForFirstWinner)
{
    std::ifstream in(chain());
    std::string header, genesis, first;
    std::getline(in, header);
    std::getline(in, genesis);
    std::getline(in, first);
    const std::string winner = nlohmann::json::parse(first)["winner"];
    const auto r = cli({"replay-balances", "--chain", chain(), "--address", winner, "--height", "1"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1\n");

    const auto unknown = cli({"replay-balances", "--chain", chain(), "--address", std::string(64, '0')});
    EXPECT_EQ(unknown.code, 0);
    EXPECT_EQ(unknown.out, "0\n");
}

TEST_F(CliRun, ReplayedBalancesSumToSupply)
{
    std::ifstream in(chain());
    std::string header;
    std::getline(in, header);
    std::ifstream summary_in(dir_ / "summary.json");
    const auto summary = nlohmann::json::parse(summary_in);
    const auto parsed = nlohmann::json::parse(header);
    std::uint64_t total = 0;
    for (const auto& entry : parsed.at("registry")) {
        const auto r = cli({"replay-balances", "--chain", chain(), "--address", entry["address"].get<std::string>()});
        ASSERT_EQ(r.code, 0);
        total += std::stoull(r.out);
    }
    EXPECT_EQ(total, summary["total_supply"].get<std::uint64_t>());
}

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({"verify-chain"}).code, 2);
    EXPECT_EQ(cli({"verify-chain", "--chain", "x", "--bogus"}).code, 2);
    EXPECT_EQ(cli({"run", "--scenario", "x", "--out", "y", "--seed", "abc"}).code, 2);
    EXPECT_EQ(cli({"replay-balances", "--chain", "x", "--address", "zz"}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ValidationFailuresExitOne)
{
    EXPECT_EQ(cli({"verify-chain", "--chain", "/nonexistent/chain.jsonl"}).code, 1);
    EXPECT_EQ(cli({"scenario-check", "--scenario", "/nonexistent.yaml"}).code, 1);

    const auto bad = (std::filesystem::temp_directory_path() / "hepchain_bad_scenario.yaml").string();
    std::ofstream(bad) << "rounds: 5\nmystery: 1\n";
    const auto r = cli({"scenario-check", "--scenario", bad});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("mystery"), std::string::npos);
    EXPECT_EQ(cli({"run", "--scenario", bad, "--out", "/tmp/unused"}).code, 1);
    std::filesystem::remove(bad);

    EXPECT_EQ(cli({"scenario-check", "--scenario", std::string(HEPCHAIN_SOURCE_DIR) + "/scenarios/default.yaml"}).code,
              0);
}
