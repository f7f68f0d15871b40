// End-to-end runs of the command-line tool: document-in/document-out
// behavior, golden byte stability, and the exit-code contract
// (0 ok, 2 usage/document, 3 I/O, 4 stopped at the iteration cap).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <rmdp/io.hpp>

#include "test_models.hpp"

using rmdp::json;

namespace {

const std::string kCli = RMDP_CLI_PATH;
const std::string kSamples = RMDP_SAMPLES_DIR;

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "rmdp_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string path_in_work(const std::string& name) { return (work_dir() / name).string(); }

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
    const std::string command =
        kCli + " " + args + " > " + stdout_path + " 2> " + stderr_path;
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json read_json(const std::string& path) { return json::parse(read_file(path)); }

}  // namespace

TEST_CASE("solve emits identical bytes run after run") {
    const std::string out1 = path_in_work("solve1.json");
    const std::string out2 = path_in_work("solve2.json");
    const std::string args = "solve --model " + kSamples +
                             "/loop_exit.json --objective reach-reward --target g";
    REQUIRE(run_cli(args + " --output " + out1) == 0);
    REQUIRE(run_cli(args, out2) == 0);  // via stdout this time
    CHECK(read_file(out1) == read_file(out2));

    const json doc = read_json(out1);
    CHECK(doc["mode"] == "robust");
    CHECK(doc["converged"] == true);
    CHECK(doc["policy"]["s"] == "step");
    CHECK(std::abs(doc["values"]["s"].get<double>() - 10.0 / 7.0) < 1e-5);
    CHECK(doc["values"]["g"] == 0.0);
    CHECK(doc["model_hash"] ==
          rmdp::model_hash(rmdp::load_model(kSamples + "/loop_exit.json")));
}

TEST_CASE("solve honors mode and method selections") {
    const std::string out = path_in_work("mode.json");
    REQUIRE(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                    "--target g --mode optimistic --output " + out) == 0);
    CHECK(std::abs(read_json(out)["values"]["s"].get<double>() - 10.0 / 3.0) < 1e-5);

    const std::string vi = path_in_work("ring_vi.json");
    const std::string pi = path_in_work("ring_pi.json");
    const std::string base = "solve --model " + kSamples +
                             "/ring.json --objective reach-reward --target s2 --epsilon 1e-9 ";
    REQUIRE(run_cli(base + "--method vi --output " + vi) == 0);
    REQUIRE(run_cli(base + "--method pi --output " + pi) == 0);
    const double v_vi = read_json(vi)["values"]["s0"].get<double>();
    const double v_pi = read_json(pi)["values"]["s0"].get<double>();
    CHECK(std::abs(v_vi - 13.0 / 6.0) < 1e-5);
    CHECK(std::abs(v_vi - v_pi) < 1e-5);
    CHECK(read_json(pi)["policy"]["s0"] == "a");
}

TEST_CASE("solve evaluates a fixed policy and echoes its document") {
    const std::string policy = path_in_work("loop_policy.json");
    rmdp::write_text(policy, R"({"s": "step", "g": "step"})");
    const std::string out = path_in_work("policy_eval.json");
    REQUIRE(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                    "--target g --policy " + policy + " --output " + out) == 0);
    const json doc = read_json(out);
    CHECK(doc["policy"]["s"] == "step");
    CHECK(std::abs(doc["values"]["s"].get<double>() - 10.0 / 7.0) < 1e-5);
}

TEST_CASE("discounted solves take a factor instead of a target") {
    const std::string out = path_in_work("discounted.json");
    REQUIRE(run_cli("solve --model " + kSamples + "/loop_exit.json --objective discounted "
                    "--discount 0.9 --output " + out) == 0);
    CHECK(std::abs(read_json(out)["values"]["s"].get<double>() - 1.0 / 0.73) < 1e-4);

    CHECK(run_cli("solve --model " + kSamples + "/loop_exit.json --objective discounted "
                  "--discount 0.9 --target g") == 2);
    CHECK(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                  "--target g --discount 0.9") == 2);
}

TEST_CASE("multi-environment models route through enumeration or evaluation") {
    const std::string model = kSamples + "/switch_memdp.json";
    CHECK(run_cli("solve --model " + model + " --objective reachability --target g") == 2);
    CHECK(run_cli("solve --model " + model +
                  " --objective reachability --target g --mode optimistic "
                  "--method enumerate") == 2);

    const std::string out = path_in_work("memdp_enum.json");
    REQUIRE(run_cli("solve --model " + model + " --objective reachability --target g "
                    "--method enumerate --output " + out) == 0);
    const json doc = read_json(out);
    CHECK(doc["values"]["s"] == 0.0);
    CHECK(doc["values"]["g"] == 1.0);
    CHECK(doc["policy"]["s"] == "a");

    const std::string policy = path_in_work("memdp_policy.json");
    rmdp::write_text(policy, R"({"s": "a", "g": "a", "x": "a"})");
    const std::string eval_out = path_in_work("memdp_eval.json");
    REQUIRE(run_cli("solve --model " + model + " --objective reachability --target g "
                    "--policy " + policy + " --output " + eval_out) == 0);
    const json eval_doc = read_json(eval_out);
    CHECK(eval_doc["environment_initial_values"] == json::array({1.0, 0.0}));
    CHECK(eval_doc["worst_environment"] == 1);
    CHECK(eval_doc["values"]["s"] == 0.0);

    CHECK(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                  "--target g --method enumerate") == 2);
}

TEST_CASE("exit codes separate usage, document, I/O and convergence failures") {
    CHECK(run_cli("solve --objective reach-reward --target g") == 2);   // missing --model
    CHECK(run_cli("solve --model x.json --objective sharpest --target g") == 2);
    CHECK(run_cli("") == 2);                                            // no subcommand
    CHECK(run_cli("--help") == 0);

    CHECK(run_cli("solve --model " + path_in_work("missing.json") +
                  " --objective reach-reward --target g") == 3);

    const std::string broken = path_in_work("broken.json");
    rmdp::write_text(broken, "{\"kind\": ");
    CHECK(run_cli("solve --model " + broken + " --objective reach-reward --target g") == 2);

    json invalid = rmdp::serialize_model(testm::loop_exit_mdp(0.5));
    invalid["transitions"][0]["p"] = 0.4;
    const std::string leaky = path_in_work("leaky.json");
    rmdp::write_text(leaky, invalid.dump(2) + "\n");
    const std::string err = path_in_work("leaky.err");
    CHECK(run_cli("solve --model " + leaky + " --objective reach-reward --target g",
                  "/dev/null", err) == 2);
    CHECK(read_file(err).find("row-not-stochastic") != std::string::npos);

    CHECK(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                  "--target nowhere") == 2);
}

TEST_CASE("the iteration cap still writes the partial document") {
    const std::string out = path_in_work("starved.json");
    CHECK(run_cli("solve --model " + kSamples + "/loop_exit.json --objective reach-reward "
                  "--target g --epsilon 1e-12 --max-iter 3 --output " + out) == 4);
    const json doc = read_json(out);
    CHECK(doc["converged"] == false);
    CHECK(doc["iterations"] == 3);
}

TEST_CASE("generation is deterministic and well formed") {
    const std::string g1 = path_in_work("gen1.json");
    const std::string g2 = path_in_work("gen2.json");
    const std::string args = "generate --states 5 --actions 2 --seed 3";
    REQUIRE(run_cli(args + " --output " + g1) == 0);
    REQUIRE(run_cli(args + " --output " + g2) == 0);
    CHECK(read_file(g1) == read_file(g2));

    const rmdp::Model model = rmdp::load_model(g1);
    CHECK(model.kind == rmdp::ModelKind::Imdp);
    CHECK(model.num_states() == 5);
    CHECK(rmdp::validate(model).empty());

    const std::string ball = path_in_work("gen_l1.json");
    REQUIRE(run_cli("generate --states 4 --actions 2 --seed 9 --kind l1 --output " + ball) == 0);
    const rmdp::Model l1 = rmdp::load_model(ball);
    CHECK(l1.kind == rmdp::ModelKind::L1);
    CHECK(rmdp::validate(l1).empty());

    const std::string point = path_in_work("gen_mdp.json");
    REQUIRE(run_cli("generate --states 4 --actions 1 --seed 2 --kind mdp --width 0 --output " +
                    point) == 0);
    CHECK(rmdp::load_model(point).kind == rmdp::ModelKind::Mdp);

    CHECK(run_cli("generate --states 4 --actions 2 --seed 9 --kind memdp") == 2);
    CHECK(run_cli("generate --states 1 --actions 1 --seed 9") == 2);
}

TEST_CASE("learning reports the learned model, both solves and metadata") {
    const std::string truth = path_in_work("truth.json");
    rmdp::write_text(truth, rmdp::serialize_model(testm::pac_truth_model()).dump(2) + "\n");

    const std::string out = path_in_work("learn.json");
    const std::string learned_path = path_in_work("learned_model.json");
    REQUIRE(run_cli("learn --truth " + truth + " --samples 50 --delta 0.1 --seed 7 "
                    "--objective reach-reward --target goal --output " + out +
                    " --output-model " + learned_path) == 0);

    const json doc = read_json(out);
    CHECK(doc["metadata"]["n_per_sa"] == 50);
    CHECK(std::abs(doc["metadata"]["delta_prime"].get<double>() - 0.1 / 11.0) < 1e-12);
    const double robust = doc["result"]["values"]["s0"].get<double>();
    const double nominal = doc["nominal"]["values"]["s0"].get<double>();
    CHECK(robust <= nominal + 2e-6);

    const rmdp::Model learned = rmdp::load_model(learned_path);
    CHECK(learned.kind == rmdp::ModelKind::Imdp);
    CHECK(rmdp::validate(learned).empty());
    CHECK(rmdp::serialize_model(learned).dump() == doc["learned_model"].dump());

    // Same seed, same bytes.
    const std::string again = path_in_work("learn_again.json");
    REQUIRE(run_cli("learn --truth " + truth + " --samples 50 --delta 0.1 --seed 7 "
                    "--objective reach-reward --target goal --output " + again) == 0);
    CHECK(read_file(out) == read_file(again));

    CHECK(run_cli("learn --truth " + truth + " --samples 50 --seed 7 "
                  "--objective reach-reward --target goal") == 2);  // no --delta
}
