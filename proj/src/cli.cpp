#include "itsr/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "itsr/image_env.hpp"
#include "itsr/model.hpp"
#include "itsr/nn/checkpoint.hpp"
#include "itsr/oracle.hpp"
#include "itsr/retrieval.hpp"
#include "itsr/run_config.hpp"
#include "itsr/serialization.hpp"
#include "itsr/training.hpp"

namespace itsr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::string env;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--workers", o.workers, "Worker threads");
  cmd->add_option("--out", o.out, "Output root (default $ITSR_OUT or ./runs)");
  cmd->add_option("--env", o.env, "Environment: toy-constrained, toy-free or image");
  cmd->add_option("--set", o.sets, "Config override key.path=value (repeatable)");
}

RunConfig resolve_config(const CommonOptions& o) {
  json doc = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot read config " + o.config);
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
  }
  for (const auto& s : o.sets) apply_override(doc, s);
  if (!o.env.empty()) doc["env"]["kind"] = o.env;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.workers) doc["workers"] = *o.workers;
  return parse_run_config(doc);
}

fs::path output_root(const CommonOptions& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("ITSR_OUT"); env && *env) return env;
  return "runs";
}

fs::path make_run_dir(const CommonOptions& o, const std::string& name) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << name << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  const fs::path root = output_root(o);
  fs::path dir = root / stamp.str();
  for (int i = 1; fs::exists(dir); ++i) dir = root / (stamp.str() + "-" + std::to_string(i));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string epoch_name(int global_epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch-%04d", global_epoch);
  return buf;
}

Episode read_episode(const Environment& env, const std::string& path, int index) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read episode file " + path);
  std::string line;
  std::string text;
  int n = 0;
  // Accept either a single JSON document or JSON lines (pick `index`).
  std::ostringstream all;
  all << in.rdbuf();
  text = all.str();
  try {
    const json j = json::parse(text);
    return episode_from_json(env, j);
  } catch (const json::parse_error&) {
  }
  std::istringstream lines(text);
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (n++ == index) return episode_from_json(env, json::parse(line));
  }
  throw ConfigError("episode index " + std::to_string(index) + " not found in " + path);
}

// ---------------------------------------------------------------------------

int cmd_train(const CommonOptions& o, bool mcts, const std::string& resume, bool trace, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const auto env = make_environment(cfg.env);
  const auto head = mcts ? nn::HeadKind::ActorCritic : nn::HeadKind::Classifier;
  nn::PolicyValueNet<float> net(make_network_config(cfg, *env, head), derive_seed(cfg.seed, "init"));
  int first_epoch = 0;
  if (!resume.empty()) {
    try {
      const auto meta = nn::load(resume, net);
      first_epoch = static_cast<int>(meta.epoch) + 1;
    } catch (const nn::FormatError& e) {
      throw ConfigError(std::string("resume checkpoint: ") + e.what());
    } catch (const nn::ShapeError& e) {
      throw ConfigError(std::string("resume checkpoint: ") + e.what());
    }
  }

  const fs::path dir = make_run_dir(o, mcts ? "train-mcts" : "train-supervised");
  json snapshot = to_json(cfg);
  snapshot["subcommand"] = mcts ? "train-mcts" : "train-supervised";
  if (!resume.empty()) snapshot["resume"] = resume;
  write_json(dir / "config.json", snapshot);
  fs::create_directories(dir / "checkpoints");
  if (trace) fs::create_directories(dir / "traces");

  auto metrics = open_out(dir / "metrics.csv");
  metrics << "global_epoch,stage,epoch,max_len,policy_ce,value_mse,total_loss,success_rate,new_samples,buffer_size\n";
  auto timing = open_out(dir / "timing.csv");
  timing << "global_epoch,wall_seconds\n";
  auto log = open_out(dir / "log.jsonl");

  auto on_epoch = [&](const EpochMetrics& m, const nn::PolicyValueNet<float>& current) {
    metrics << m.global_epoch << ',' << m.stage << ',' << m.epoch << ',' << m.max_len << ',' << fixed(m.policy_ce)
            << ',' << fixed(m.value_mse) << ',' << fixed(m.total_loss) << ',' << fixed(m.success_rate) << ','
            << m.new_samples << ',' << m.buffer_size << '\n';
    metrics.flush();
    timing << m.global_epoch << ',' << fixed(m.wall_seconds) << '\n';
    timing.flush();
    log << json{{"global_epoch", m.global_epoch}, {"stage", m.stage},         {"epoch", m.epoch},
                {"max_len", m.max_len},           {"policy_ce", m.policy_ce}, {"value_mse", m.value_mse},
                {"total_loss", m.total_loss},     {"success_rate", m.success_rate},
                {"buffer_size", m.buffer_size},   {"wall_seconds", m.wall_seconds}}
               .dump()
        << '\n';
    log.flush();
    const nn::CheckpointMetadata meta{static_cast<std::uint32_t>(m.stage), static_cast<std::uint32_t>(m.global_epoch),
                                      cfg.seed};
    nn::save(current, dir / "checkpoints" / (epoch_name(m.global_epoch) + ".ckpt"), meta);
    nn::save(current, dir / "model.ckpt", meta);
    if (trace && mcts) {
      const auto& stage = cfg.training.curriculum[static_cast<std::size_t>(m.stage)];
      const auto episodes = generate_episodes(*env, 1, effective_max_len(stage, *env), cfg.seed, m.global_epoch);
      MctsConfig mc = cfg.training.mcts;
      mc.max_depth = m.max_len;
      Rng rng(derive_seed(cfg.seed, "trace", {static_cast<std::uint64_t>(m.global_epoch)}));
      const NetworkModel model(current);
      const auto result = self_play_episode(episodes[0], model, *env, mc, rng, true);
      write_json(dir / "traces" / (epoch_name(m.global_epoch) + ".json"),
                 json{{"episode", episode_to_json(*env, episodes[0])},
                      {"success", result.success},
                      {"moves", search_trace_to_json(*env, result.trace)}});
    }
  };

  if (mcts) {
    train_mcts(*env, net, cfg.training, on_epoch, first_epoch);
  } else {
    train_supervised(*env, net, cfg.training, on_epoch, first_epoch);
  }
  out << dir.string() << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, bool untrained, const std::string& model_name,
             std::ostream& out) {
  if (checkpoint.empty() && !untrained) throw ConfigError("eval requires --checkpoint (or --untrained)");
  const RunConfig cfg = resolve_config(o);
  const auto env = make_environment(cfg.env);

  nn::HeadKind head = nn::HeadKind::ActorCritic;
  std::optional<nn::CheckpointData> data;
  if (!checkpoint.empty()) {
    try {
      data = nn::read_checkpoint(checkpoint);
    } catch (const nn::FormatError& e) {
      throw ConfigError(std::string("checkpoint: ") + e.what());
    }
    const bool has_critic = std::any_of(data->tensors.begin(), data->tensors.end(),
                                        [](const nn::NamedTensor& t) { return t.name == "critic.weight"; });
    head = has_critic ? nn::HeadKind::ActorCritic : nn::HeadKind::Classifier;
  }
  nn::PolicyValueNet<float> net(make_network_config(cfg, *env, head), derive_seed(cfg.seed, "init"));
  if (data) {
    try {
      nn::restore_checkpoint(*data, net);
    } catch (const nn::ShapeError& e) {
      throw ConfigError(std::string("checkpoint does not fit this configuration: ") + e.what());
    }
  }

  const int max_len = cfg.eval.max_len > 0 ? cfg.eval.max_len : env->max_depth();
  const int max_depth = cfg.eval.max_depth > 0 ? cfg.eval.max_depth : env->max_depth();
  const auto test_set = generate_test_set(*env, cfg.eval.test_pairs, max_len, cfg.seed);
  const NetworkModel model(net);
  const auto report = evaluate(model, *env, test_set, cfg.eval.ks, max_depth, cfg.workers);

  const fs::path dir = make_run_dir(o, "eval");
  json snapshot = to_json(cfg);
  snapshot["subcommand"] = "eval";
  snapshot["checkpoint"] = checkpoint;
  write_json(dir / "config.json", snapshot);
  write_eval_outputs(report, *env, model_name, dir);
  json summary{{"run_dir", dir.string()},
               {"single_shot_accuracy", report.single_shot_accuracy},
               {"mean_expansions", report.mean_expansions}};
  for (const auto& [k, acc] : report.top_k_accuracy) summary["top_k_accuracy"][std::to_string(k)] = acc;
  if (report.consecutive_inversion_rate) summary["consecutive_inversion_rate"] = *report.consecutive_inversion_rate;
  out << summary.dump() << '\n';
  return 0;
}

int cmd_generate(const CommonOptions& o, int count, int max_len, bool pgm, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const auto env = make_environment(cfg.env);
  if (count < 1) throw ConfigError("--count must be >= 1");
  const int len = max_len > 0 ? max_len : env->max_depth();
  const auto episodes = generate_test_set(*env, count, len, cfg.seed);
  const fs::path dir = make_run_dir(o, "generate");
  write_json(dir / "config.json", to_json(cfg));
  auto lines = open_out(dir / "episodes.jsonl");
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    lines << episode_to_json(*env, episodes[i]).dump() << '\n';
    if (pgm) {
      fs::create_directories(dir / "pgm");
      char name[64];
      std::snprintf(name, sizeof(name), "%05zu", i);
      write_pgm(episodes[i].source.image, dir / "pgm" / (std::string(name) + "_source.pgm"));
      write_pgm(episodes[i].target, dir / "pgm" / (std::string(name) + "_target.pgm"));
    }
  }
  out << dir.string() << '\n';
  return 0;
}

int cmd_describe(const std::string& path, std::ostream& out) {
  nn::CheckpointData data;
  try {
    data = nn::read_checkpoint(path);
  } catch (const nn::FormatError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  out << "format ITSRCKPT version " << nn::kCheckpointVersion << '\n';
  out << "stage " << data.metadata.stage << " epoch " << data.metadata.epoch << " seed " << data.metadata.seed << '\n';
  std::size_t total = 0;
  for (const auto& t : data.tensors) {
    out << t.name << " [";
    for (std::size_t i = 0; i < t.shape.size(); ++i) out << (i ? ", " : "") << t.shape[i];
    out << "]\n";
    if (t.name.rfind("momentum/", 0) != 0) total += t.data.size();
  }
  out << "parameters " << total << '\n';
  return 0;
}

int cmd_emit_fixtures(const std::string& dir, int count, int side, std::uint64_t seed, std::ostream& out) {
  if (dir.empty()) throw ConfigError("emit-fixtures requires --out");
  if (count < 1 || side < 3) throw ConfigError("emit-fixtures needs --count >= 1 and --side >= 3");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const auto pool = make_fixture_pool(count, side, seed);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "fixture_%04zu.pgm", i);
    write_pgm(pool[i], fs::path(dir) / name);
  }
  out << json{{"dir", dir}, {"count", count}, {"side", side}, {"seed", seed}}.dump() << '\n';
  return 0;
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Image transformation sequence retrieval: environments, MCTS training, retrieval and oracle"};
  app.require_subcommand(1);

  CommonOptions gen_opts, mcts_opts, sup_opts, eval_opts, oracle_opts;
  int gen_count = 10, gen_max_len = 0;
  bool gen_pgm = false;
  auto* generate = app.add_subcommand("generate", "Generate source/target episodes");
  add_common(generate, gen_opts);
  generate->add_option("--count", gen_count, "Number of episodes");
  generate->add_option("--max-len", gen_max_len, "Maximum ground-truth length (default: environment maximum)");
  generate->add_flag("--pgm", gen_pgm, "Also write PGM renders");

  std::string mcts_resume, sup_resume;
  bool trace_search = false;
  auto* train_mcts_cmd = app.add_subcommand("train-mcts", "Curriculum MCTS self-play training");
  add_common(train_mcts_cmd, mcts_opts);
  train_mcts_cmd->add_option("--resume", mcts_resume, "Continue from a checkpoint");
  train_mcts_cmd->add_flag("--trace-search", trace_search, "Dump one traced self-play episode per epoch");
  auto* train_sup_cmd = app.add_subcommand("train-supervised", "Supervised next-action baseline");
  add_common(train_sup_cmd, sup_opts);
  train_sup_cmd->add_option("--resume", sup_resume, "Continue from a checkpoint");

  std::string checkpoint, model_name = "model";
  bool untrained = false;
  auto* eval = app.add_subcommand("eval", "Single-shot and Top-K evaluation on held-out pairs");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", checkpoint, "Model checkpoint");
  eval->add_flag("--untrained", untrained, "Evaluate a freshly initialised network instead");
  eval->add_option("--model-name", model_name, "Label used in the output CSVs");

  auto* oracle = app.add_subcommand("oracle", "Brute-force solver and counters");
  oracle->require_subcommand(1);
  std::string episode_path;
  int episode_index = 0, solve_depth = 0, solution_len = 0;
  auto* solve = oracle->add_subcommand("solve", "Shortest solution by breadth-first search");
  add_common(solve, oracle_opts);
  solve->add_option("--episode", episode_path, "Episode JSON (or JSON lines)")->required();
  solve->add_option("--index", episode_index, "Line index for JSON-lines input");
  solve->add_option("--max-depth", solve_depth, "Depth limit (default: ground-truth length)");
  auto* count_solutions_cmd = oracle->add_subcommand("count-solutions", "Count solutions of an exact length");
  add_common(count_solutions_cmd, oracle_opts);
  count_solutions_cmd->add_option("--episode", episode_path, "Episode JSON (or JSON lines)")->required();
  count_solutions_cmd->add_option("--index", episode_index, "Line index for JSON-lines input");
  count_solutions_cmd->add_option("--length", solution_len, "Exact sequence length (default: ground-truth length)");
  std::string count_env;
  int alphabet = 5, cap = 2, min_len = 1, max_len = 10;
  bool cross_check = false;
  auto* count_seq = oracle->add_subcommand("count-sequences", "Count constrained transformation sequences");
  count_seq->add_option("--env", count_env, "Take the grammar from an environment (image)");
  count_seq->add_option("--alphabet", alphabet, "Number of transforms");
  count_seq->add_option("--cap", cap, "Maximum uses per transform");
  count_seq->add_option("--min-len", min_len, "Minimum length");
  count_seq->add_option("--max-len", max_len, "Maximum length");
  count_seq->add_flag("--cross-check", cross_check, "Also count by explicit enumeration");

  std::string describe_path;
  auto* describe = app.add_subcommand("describe-checkpoint", "Print checkpoint tensor names and shapes");
  describe->add_option("path", describe_path, "Checkpoint file")->required();

  std::string fixture_dir;
  int fixture_count = 64, fixture_side = 32;
  std::uint64_t fixture_seed = 1;
  auto* fixtures = app.add_subcommand("emit-fixtures", "Write a reproducible procedural PGM source pool");
  fixtures->add_option("--out", fixture_dir, "Destination directory")->required();
  fixtures->add_option("--count", fixture_count, "Number of images");
  fixtures->add_option("--side", fixture_side, "Image side in pixels");
  fixtures->add_option("--seed", fixture_seed, "Pool seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, "ConfigError", e.what());
    return 2;
  }

  try {
    if (*generate) return cmd_generate(gen_opts, gen_count, gen_max_len, gen_pgm, out);
    if (*train_mcts_cmd) return cmd_train(mcts_opts, true, mcts_resume, trace_search, out);
    if (*train_sup_cmd) return cmd_train(sup_opts, false, sup_resume, false, out);
    if (*eval) return cmd_eval(eval_opts, checkpoint, untrained, model_name, out);
    if (*describe) return cmd_describe(describe_path, out);
    if (*fixtures) return cmd_emit_fixtures(fixture_dir, fixture_count, fixture_side, fixture_seed, out);
    if (*count_seq) {
      if (!count_env.empty()) {
        if (count_env != "image") throw ConfigError("count-sequences --env supports only 'image'");
        const ImageEnvConfig image_cfg;
        alphabet = kTransformCount;
        cap = image_cfg.max_repeats_per_transform;
        min_len = 1;
        max_len = image_cfg.max_len;
      }
      json j{{"alphabet", alphabet}, {"cap", cap}, {"min_len", min_len}, {"max_len", max_len}};
      try {
        j["count"] = count_sequences(alphabet, cap, min_len, max_len);
        if (cross_check) j["enumerated"] = count_sequences_enumerated(alphabet, cap, min_len, max_len);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      out << j.dump() << '\n';
      return 0;
    }
    if (*solve || *count_solutions_cmd) {
      const RunConfig cfg = resolve_config(oracle_opts);
      const auto env = make_environment(cfg.env);
      const Episode ep = read_episode(*env, episode_path, episode_index);
      const int gt_len = static_cast<int>(ep.ground_truth.size());
      if (*solve) {
        const auto found = bfs_solve(*env, ep.source, ep.target, solve_depth > 0 ? solve_depth : gt_len);
        json j{{"found", found.has_value()}};
        if (found) {
          j["trajectory"] = trajectory_to_json(*env, *found);
          j["length"] = found->size();
        }
        out << j.dump() << '\n';
      } else {
        const int len = solution_len > 0 ? solution_len : gt_len;
        out << json{{"length", len}, {"count", count_solutions(*env, ep.source, ep.target, len)}}.dump() << '\n';
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    error_record(err, "ConfigError", e.what());
    return 2;
  } catch (const IoError& e) {
    error_record(err, "IoError", e.what());
    return 3;
  } catch (const TrainingAborted& e) {
    error_record(err, "TrainingAborted", e.what());
    return 4;
  } catch (const BudgetExceeded& e) {
    error_record(err, "BudgetExceeded", e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record(err, "Error", e.what());
    return 1;
  }
  return 1;
}

}  // namespace itsr
