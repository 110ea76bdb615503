// seqscore: uncertainty measures for sequence models and the synthetic
// estimator-quality study.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqscore/decode.hpp"
#include "seqscore/errors.hpp"
#include "seqscore/pipeline.hpp"
#include "seqscore/study.hpp"
#include "seqscore/synthdist.hpp"
#include "seqscore/traceio.hpp"

namespace fs = std::filesystem;
using namespace seqscore;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out;
};

/// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct GridFlags {
  std::vector<std::size_t> widths{20, 100};
  std::vector<std::size_t> depths{2, 3, 4};
  std::size_t runs = 1000;
  std::size_t draws = 1;
  bool resample = false;
  double budget = 1e8;
  std::string model_config;

  void add(CLI::App* cmd) {
    cmd->add_option("--widths", widths, "Vocabulary sizes (Zipf presets exist for 20 and 100)")->delimiter(',');
    cmd->add_option("--depths", depths, "Sequence lengths")->delimiter(',');
    cmd->add_option("--runs", runs, "Monte Carlo repetitions per model draw")->check(CLI::PositiveNumber);
    cmd->add_option("--draws", draws, "Model draws per (width, depth)")->check(CLI::PositiveNumber);
    cmd->add_flag("--resample-model", resample, "Draw a new model for every run");
    cmd->add_option("--budget", budget, "Maximum number of enumerated leaves")->check(CLI::PositiveNumber);
    cmd->add_option("--model-config", model_config, "Model config block; replaces --widths/--depths");
  }

  StudyGrid grid(const GlobalOptions& g) const {
    StudyGrid grid;
    grid.depths = depths;
    grid.runs = runs;
    grid.draws = draws;
    grid.resample_model = resample;
    grid.master_seed = g.seed;
    grid.budget.max_leaves = static_cast<std::uint64_t>(budget);
    if (!model_config.empty()) {
      const auto cfg = parse_model_config(read_file(model_config));
      grid.specs = {cfg.spec};
      grid.depths = {cfg.depth};
      if (!g.seed_given) grid.master_seed = cfg.seed;
    } else {
      grid.specs = preset_specs(widths);
    }
    return grid;
  }
};

void print_sequences(const std::vector<ScoredSequence>& seqs, std::ostream& out) {
  for (const auto& s : seqs) {
    nlohmann::json j = {{"tokens", s.tokens()},
                        {"token_log_probs", s.token_log_probs()},
                        {"total_log_prob", s.total_log_prob()}};
    out << j.dump() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqscore: uncertainty measures for sequence models"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "OpenMP threads (default: runtime default)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file (or directory for evaluate); stdout when omitted");

  // synth-entropy
  auto* synth_entropy = app.add_subcommand("synth-entropy", "Predictive entropy estimator study on synthetic models");
  GridFlags entropy_grid;
  entropy_grid.add(synth_entropy);
  std::vector<std::size_t> entropy_samples = iota_counts(30);
  std::vector<double> entropy_temps{1.0, 0.5};
  synth_entropy->add_option("--samples", entropy_samples, "Sample counts N")->delimiter(',');
  synth_entropy->add_option("--temperatures", entropy_temps, "Sampling temperatures")->delimiter(',');

  // synth-maxlik
  auto* synth_maxlik = app.add_subcommand("synth-maxlik", "Maximum sequence likelihood search study");
  GridFlags maxlik_grid;
  maxlik_grid.add(synth_maxlik);
  std::vector<std::size_t> maxlik_samples = iota_counts(30);
  std::vector<std::size_t> maxlik_beams = iota_counts(30);
  std::vector<double> maxlik_temps{0.5, 1.0};
  synth_maxlik->add_option("--samples", maxlik_samples, "Multinomial sample counts N")->delimiter(',');
  synth_maxlik->add_option("--beam-widths", maxlik_beams, "Beam widths")->delimiter(',');
  bool beam_only = false;
  synth_maxlik->add_option("--temperatures", maxlik_temps, "Sampling temperatures")->delimiter(',');
  synth_maxlik->add_flag("--beam-only", beam_only, "Skip multinomial sampling");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Decode a synthetic model and print scored sequences");
  std::string strategy = "greedy";
  std::size_t beam_width = 1;
  double temperature = 1.0;
  std::size_t length = 0;
  std::size_t n_samples = 1;
  std::size_t decode_width = 20;
  std::size_t decode_depth = 4;
  std::string decode_config;
  decode_cmd->add_option("--strategy", strategy, "greedy | beam | multinomial")
      ->check(CLI::IsMember({"greedy", "beam", "multinomial", "ms"}));
  decode_cmd->add_option("--beam-width", beam_width, "Beam width")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--temperature", temperature, "Sampling temperature");
  decode_cmd->add_option("--length", length, "Sequence length (default: model depth)");
  decode_cmd->add_option("--samples", n_samples, "Number of multinomial samples")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--width", decode_width, "Preset vocabulary size");
  decode_cmd->add_option("--depth", decode_depth, "Model depth")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--model-config", decode_config, "Model config block");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score generation traces with uncertainty measures");
  std::string traces;
  std::vector<std::string> measure_names{"G-NLL", "PE", "LN-PE", "SE", "LN-SE", "D-SE"};
  std::string cluster_name = "exact";
  std::string nli_endpoint;
  if (const char* env = std::getenv("SEQSCORE_NLI_ENDPOINT")) nli_endpoint = env;
  int nli_timeout_ms = 10'000;
  double f1_threshold = 0.5;
  std::string format;
  const auto add_cluster_flags = [&](CLI::App* cmd) {
    cmd->add_option("--cluster", cluster_name, "exact | normalized | entailment")
        ->check(CLI::IsMember({"exact", "normalized", "entailment"}));
    cmd->add_option("--nli-endpoint", nli_endpoint, "Entailment oracle URL (env SEQSCORE_NLI_ENDPOINT)");
    cmd->add_option("--nli-timeout-ms", nli_timeout_ms, "Oracle timeout in milliseconds")->check(CLI::PositiveNumber);
  };
  score_cmd->add_option("--traces", traces, "JSONL trace file")->required();
  score_cmd->add_option("--measures", measure_names, "Measures to compute")->delimiter(',');
  add_cluster_flags(score_cmd);
  score_cmd->add_option("--f1-threshold", f1_threshold, "SQuAD F1 threshold for the f1 labeler");
  score_cmd->add_option("--format", format, "csv | jsonl (default: from --out extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  // cluster
  auto* cluster_cmd = app.add_subcommand("cluster", "Print semantic cluster ids of each record's samples");
  cluster_cmd->add_option("--traces", traces, "JSONL trace file")->required();
  add_cluster_flags(cluster_cmd);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "AUROC and rejection accuracy of scored results");
  std::vector<std::string> results;
  std::string labels_path;
  double keep_fraction = 0.8;
  evaluate_cmd->add_option("--results", results, "[dataset=]results file; repeat per dataset")->required();
  evaluate_cmd->add_option("--labels", labels_path, "JSONL labels {\"id\", \"labels\"} overriding result labels");
  evaluate_cmd->add_option("--keep-fraction", keep_fraction, "Fraction kept for rejection accuracy");

  // validate-traces
  auto* validate_cmd = app.add_subcommand("validate-traces", "Check a trace file against the schema");
  validate_cmd->add_option("--traces", traces, "JSONL trace file")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (g.threads > 0) set_thread_count(g.threads);

    if (*synth_entropy) {
      EntropyStudyConfig cfg;
      cfg.grid = entropy_grid.grid(g);
      cfg.sample_counts = entropy_samples;
      cfg.temperatures = entropy_temps;
      const auto rows = entropy_study(cfg);
      Output out(g.out);
      write_entropy_csv(rows, out.stream());
    } else if (*synth_maxlik) {
      MaxLikStudyConfig cfg;
      cfg.grid = maxlik_grid.grid(g);
      cfg.sample_counts = maxlik_samples;
      cfg.beam_widths = maxlik_beams;
      cfg.temperatures = maxlik_temps;
      if (beam_only) cfg.temperatures.clear();
      const auto rows = maxlik_study(cfg);
      Output out(g.out);
      write_maxlik_csv(rows, out.stream());
    } else if (*decode_cmd) {
      SynthModelConfig model_cfg;
      if (!decode_config.empty()) {
        model_cfg = parse_model_config(read_file(decode_config));
      } else {
        model_cfg = {DirichletSpec::preset(decode_width), decode_depth, g.seed};
      }
      const SyntheticModel model = sample_model(model_cfg.spec, model_cfg.depth, model_cfg.seed);
      const auto cfg = make_decode_config(strategy, beam_width, temperature, g.seed, length);
      Output out(g.out);
      print_sequences(decode(model, cfg, n_samples), out.stream());
    } else if (*score_cmd) {
      const auto records = read_traces(traces);
      ScoreOptions opts;
      opts.measures.clear();
      for (const auto& name : measure_names) opts.measures.push_back(parse_measure(name));
      opts.strategy = make_cluster_strategy(cluster_name, nli_endpoint, std::chrono::milliseconds(nli_timeout_ms));
      opts.f1.threshold = f1_threshold;
      const auto rows = score_records(records, opts);
      ResultFormat fmt = g.out.empty() ? ResultFormat::Csv : format_for_path(g.out);
      if (format == "csv") fmt = ResultFormat::Csv;
      if (format == "jsonl") fmt = ResultFormat::Jsonl;
      Output out(g.out);
      write_results(rows, out.stream(), fmt);
    } else if (*cluster_cmd) {
      const auto records = read_traces(traces);
      const auto strategy_obj =
          make_cluster_strategy(cluster_name, nli_endpoint, std::chrono::milliseconds(nli_timeout_ms));
      const auto clusters = cluster_records(records, strategy_obj);
      Output out(g.out);
      write_cluster_assignments(records, clusters, out.stream());
    } else if (*evaluate_cmd) {
      std::vector<DatasetResults> datasets;
      for (const auto& spec : results) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        const std::string name = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
        datasets.push_back({name, read_results(path)});
      }
      const LabelTable overrides = labels_path.empty() ? LabelTable{} : read_labels(labels_path);
      const auto report = evaluate(std::move(datasets), overrides, keep_fraction);
      if (g.out.empty()) {
        write_report_table(report, std::cout);
        std::cout << '\n';
        write_report_csv(report, std::cout);
      } else {
        fs::create_directories(g.out);
        std::ofstream csv(fs::path(g.out) / "evaluation.csv", std::ios::binary);
        std::ofstream txt(fs::path(g.out) / "evaluation.txt", std::ios::binary);
        if (!csv || !txt) throw InputError("cannot write report into " + g.out);
        write_report_csv(report, csv);
        write_report_table(report, txt);
        write_report_table(report, std::cout);
      }
    } else if (*validate_cmd) {
      const auto records = read_traces(traces);
      std::size_t samples = 0;
      for (const auto& r : records) samples += r.samples.size();
      Output out(g.out);
      out.stream() << "ok: " << records.size() << " records, " << samples << " samples\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
