// glovelink command line: dataset synthesis, training, evaluation, batch
// simulation, trial reports and the live gateway.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glovelink/config.hpp"
#include "glovelink/error.hpp"
#include "glovelink/gateway.hpp"
#include "glovelink/gesture.hpp"
#include "glovelink/handmodel.hpp"
#include "glovelink/mlp.hpp"
#include "glovelink/pipeline.hpp"
#include "glovelink/scenario.hpp"
#include "glovelink/sessionio.hpp"

namespace gl = glovelink;
using nlohmann::json;

namespace {

gl::ClassCounts parse_counts(const std::string& text) {
  gl::ClassCounts counts{};
  std::stringstream ss(text);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= counts.size()) break;
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
    }
    if (v < 0 || used != item.size()) throw gl::Error(gl::ErrorCode::InvalidArgument, "bad count '" + item + "'");
    counts[k++] = static_cast<std::size_t>(v);
  }
  if (k != counts.size() || std::getline(ss, item, ',')) {
    throw gl::Error(gl::ErrorCode::InvalidArgument, "--counts takes 5 comma-separated integers");
  }
  return counts;
}

// Per-class stratified split: the first (1 - fraction) of each class trains.
std::pair<std::vector<gl::LabeledSample>, std::vector<gl::LabeledSample>> split(
    const std::vector<gl::LabeledSample>& data, double fraction) {
  const gl::ClassCounts hist = gl::class_histogram(data);
  gl::ClassCounts seen{};
  std::pair<std::vector<gl::LabeledSample>, std::vector<gl::LabeledSample>> out;
  for (const auto& s : data) {
    const int c = gl::index_of(s.label);
    const auto n_test = static_cast<std::size_t>(fraction * static_cast<double>(hist[c]));
    (seen[c]++ < hist[c] - n_test ? out.first : out.second).push_back(s);
  }
  return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

void append_csv(const std::string& path, const std::string& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw gl::Error(gl::ErrorCode::Io, "cannot open " + path);
  if (fresh) os << gl::table_csv_header() << '\n';
  os << row << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glovelink: glove-driven teleoperation of a simulated surgical arm"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "generate a labeled landmark dataset (CSV)");
  std::string synth_out, synth_test_out, synth_counts, synth_test_counts;
  std::uint64_t synth_seed = 1;
  std::optional<double> synth_split;
  synth->add_option("--out", synth_out, "training CSV")->required();
  synth->add_option("--counts", synth_counts, "per-class counts None,Pinky,Ring,Fist,ThumbsUp");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--test-out", synth_test_out, "held-out CSV");
  synth->add_option("--test-counts", synth_test_counts, "held-out per-class counts");
  synth->add_option("--split", synth_split, "move this fraction of each class to --test-out")
      ->check(CLI::Range(0.0, 1.0));

  // train
  auto* train = app.add_subcommand("train", "train the gesture classifier");
  std::string train_data, train_out, train_test;
  gl::TrainConfig tcfg;
  train->add_option("--data", train_data)->required();
  train->add_option("--out", train_out, "model file")->required();
  train->add_option("--epochs", tcfg.max_epochs)->check(CLI::PositiveNumber);
  train->add_option("--seed", tcfg.seed);
  train->add_option("--lr", tcfg.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--batch", tcfg.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--test", train_test, "held-out CSV for the report (default: training data)");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  std::string eval_model, eval_data;
  std::size_t eval_trials = 1000;
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--trials", eval_trials, "single-sample timing trials");

  // script
  auto* script = app.add_subcommand("script", "write a scripted operator trace");
  std::string script_out;
  gl::ScriptOptions sopts;
  script->add_option("--out", script_out)->required();
  script->add_option("--duration", sopts.duration)->check(CLI::NonNegativeNumber);
  script->add_option("--rate", sopts.rate)->check(CLI::PositiveNumber);
  script->add_option("--amplitude", sopts.amplitude);
  script->add_option("--period", sopts.period)->check(CLI::PositiveNumber);
  script->add_flag("--landmarks", sopts.landmarks);
  script->add_option("--seed", sopts.seed);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "replay a hand trace through the full stack");
  std::string sim_trace, sim_out, sim_model, sim_config;
  std::optional<double> sim_latency;
  gl::SimulateOptions sim_opts;
  simulate->add_option("--trace", sim_trace)->required();
  simulate->add_option("--out", sim_out)->required();
  simulate->add_option("--latency", sim_latency, "injected arm latency, s")->check(CLI::NonNegativeNumber);
  simulate->add_option("--model", sim_model, "classifier for traces without gesture records");
  simulate->add_option("--config", sim_config, "settings JSON (default $GLOVELINK_CONFIG)");
  simulate->add_option("--tail", sim_opts.tail, "s simulated after the last sample")->check(CLI::NonNegativeNumber);

  // report
  auto* report = app.add_subcommand("report", "trial summary of a simulated trace");
  std::string report_trial, report_csv, report_user = "user";
  std::optional<double> report_delay;
  report->add_option("--trial", report_trial)->required();
  report->add_option("--csv", report_csv, "append a table row to this CSV");
  report->add_option("--user", report_user);
  report->add_option("--delay", report_delay, "use this delay instead of estimating it");

  // serve
  auto* serve = app.add_subcommand("serve", "run the WebSocket gateway");
  std::string serve_address = "127.0.0.1", serve_config, serve_model;
  unsigned short serve_port = 8765;
  serve->add_option("--port", serve_port);
  serve->add_option("--address", serve_address);
  serve->add_option("--config", serve_config, "settings JSON (default $GLOVELINK_CONFIG)");
  serve->add_option("--model", serve_model, "gesture classifier for landmark input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "InvalidArgument"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };

  try {
    if (*synth) {
      const gl::ClassCounts counts = synth_counts.empty() ? gl::kDefaultTrainCounts : parse_counts(synth_counts);
      auto data = gl::synth_dataset(counts, synth_seed);
      json out;
      if (synth_split) {
        if (synth_test_out.empty()) throw gl::Error(gl::ErrorCode::InvalidArgument, "--split needs --test-out");
        auto [tr, te] = split(data, *synth_split);
        gl::save_dataset(synth_out, tr);
        gl::save_dataset(synth_test_out, te);
        out = {{"train_rows", tr.size()}, {"test_rows", te.size()}};
      } else {
        gl::save_dataset(synth_out, data);
        out = {{"train_rows", data.size()}};
        if (!synth_test_out.empty()) {
          const gl::ClassCounts tc =
              synth_test_counts.empty() ? gl::kDefaultTestCounts : parse_counts(synth_test_counts);
          // Independent stream for the held-out set.
          const auto test = gl::synth_dataset(tc, std::mt19937_64(synth_seed)() ^ 0x7e57'0000'0000'0001ULL);
          gl::save_dataset(synth_test_out, test);
          out["test_rows"] = test.size();
        }
      }
      print_json(out);
    } else if (*train) {
      const auto data = gl::load_dataset(train_data);
      gl::TrainStats stats;
      const gl::MlpModel model = gl::train(data, tcfg, &stats);
      gl::save_model(train_out, model);
      const auto test = train_test.empty() ? data : gl::load_dataset(train_test);
      json out = gl::to_json(gl::evaluate(model, test));
      out["epochs_run"] = stats.epochs_run;
      out["final_loss"] = stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back();
      print_json(out);
    } else if (*eval) {
      const gl::MlpModel model = gl::load_model(eval_model);
      print_json(gl::to_json(gl::evaluate(model, gl::load_dataset(eval_data), eval_trials)));
    } else if (*script) {
      const gl::TraceFile trace = gl::scripted_trace(sopts);
      gl::save_trace(script_out, trace);
      print_json({{"records", trace.records.size()}});
    } else if (*simulate) {
      const gl::Settings settings = gl::resolve_settings(opt_path(sim_config));
      std::shared_ptr<const gl::MlpModel> model;
      if (!sim_model.empty()) model = std::make_shared<const gl::MlpModel>(gl::load_model(sim_model));
      sim_opts.latency = sim_latency;
      const gl::TraceFile out = gl::simulate(gl::load_trace(sim_trace), settings, model, sim_opts);
      gl::save_trace(sim_out, out);
      print_json({{"records", out.records.size()}});
    } else if (*report) {
      const gl::TrialSummary s = gl::summarize_trace(gl::load_trace(report_trial), {}, report_delay);
      const std::string row = gl::table_csv_row(report_user, s);
      if (!report_csv.empty()) append_csv(report_csv, row);
      json out = gl::to_json(s);
      out["csv"] = row;
      print_json(out);
    } else if (*serve) {
      gl::GatewayOptions gopts;
      gopts.address = serve_address;
      gopts.port = serve_port;
      gopts.settings = gl::resolve_settings(opt_path(serve_config));
      if (!serve_model.empty()) gopts.model = std::make_shared<const gl::MlpModel>(gl::load_model(serve_model));

      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by the gateway threads

      gl::Gateway gateway(gopts);
      gateway.start();
      std::cerr << json{{"listening", gopts.address}, {"port", gateway.port()}}.dump() << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      gateway.stop();
    }
  } catch (const gl::Error& e) {
    std::cerr << json{{"error", gl::to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
