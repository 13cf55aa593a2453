#include "lrla/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "lrla/belief.hpp"
#include "lrla/checkpoint.hpp"
#include "lrla/comparison.hpp"
#include "lrla/csv.hpp"
#include "lrla/manifest.hpp"
#include "lrla/meanshift.hpp"
#include "lrla/probit.hpp"
#include "lrla/trainer.hpp"

namespace fs = std::filesystem;

namespace lrla {

namespace {

void ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

CsvTable diagnostics_to_csv(const std::vector<DiagnosticsRow>& rows) {
  CsvTable table;
  table.header = {"episode", "loss", "kl", "mean_regret_window"};
  for (const DiagnosticsRow& row : rows)
    table.rows.push_back({std::to_string(row.episode), format_double(row.loss),
                          format_double(row.kl), format_double(row.mean_regret_window)});
  return table;
}

struct CheckpointFile {
  std::string filename;
  int nhat = 0;
  std::uint64_t seed = 0;
};

std::vector<CheckpointFile> scan_checkpoints(const std::string& dir) {
  std::vector<CheckpointFile> found;
  if (!fs::is_directory(dir)) return found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    int nhat = 0;
    unsigned long long seed = 0;
    if (std::sscanf(name.c_str(), "ckpt_nhat%d_seed%llu.ckpt", &nhat, &seed) == 2)
      found.push_back({name, nhat, static_cast<std::uint64_t>(seed)});
  }
  std::sort(found.begin(), found.end(), [](const CheckpointFile& a, const CheckpointFile& b) {
    return std::tie(a.nhat, a.seed) < std::tie(b.nhat, b.seed);
  });
  return found;
}

std::vector<Trajectory> simulate_baseline(BaselineKind kind, const TaskDistribution& dist,
                                          int episodes, std::uint64_t seed) {
  BaselinePolicy policy(kind, dist);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(episodes);
  RandomStream root(seed);
  for (int ep = 0; ep < episodes; ++ep) {
    RandomStream ep_rng = root.derive("eval_ep", static_cast<std::uint64_t>(ep));
    RandomStream task_rng = ep_rng.derive("task");
    const BanditTask task = sample_task(dist, task_rng);
    RandomStream rollout_rng = ep_rng.derive("rollout");
    Trajectory traj = rollout(task, policy, dist.horizon, rollout_rng);
    traj.source_tag = baseline_name(kind);
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

std::optional<BaselineKind> baseline_from_name(const std::string& name) {
  if (name == "value") return BaselineKind::kValueDirected;
  if (name == "thompson") return BaselineKind::kThompson;
  if (name == "ucb") return BaselineKind::kUcb;
  return std::nullopt;
}

// entity tags of the form lrla_nhat{N}_seed{S}
bool parse_lrla_tag(const std::string& tag, int& nhat, unsigned long long& seed) {
  return std::sscanf(tag.c_str(), "lrla_nhat%d_seed%llu", &nhat, &seed) == 2;
}

std::vector<std::string> coefficient_row(const std::string& entity, const std::string& kind,
                                         const std::string& nhat, const std::string& seed,
                                         const ProbitFit& fit) {
  const Eigen::Vector3d sd = coefficient_sd(fit);
  return {entity,
          kind,
          nhat,
          seed,
          format_double(fit.w[0]),
          format_double(fit.w[1]),
          format_double(fit.w[2]),
          format_double(sd[0]),
          format_double(sd[1]),
          format_double(sd[2]),
          format_double(fit.log_likelihood),
          std::to_string(fit.n_obs)};
}

}  // namespace

std::string checkpoint_filename(int nhat, std::uint64_t seed) {
  return "ckpt_nhat" + std::to_string(nhat) + "_seed" + std::to_string(seed) + ".ckpt";
}

std::string diagnostics_filename(int nhat, std::uint64_t seed) {
  return "diag_nhat" + std::to_string(nhat) + "_seed" + std::to_string(seed) + ".csv";
}

int worker_count_from_env() {
  const char* raw = std::getenv("LRLA_WORKERS");
  if (!raw) return 1;
  const int workers = std::atoi(raw);
  return workers >= 1 ? workers : 1;
}

int cmd_train(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.output_dir);

  struct Cell {
    int nhat;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int nhat : config.nhat_grid)
    for (std::uint64_t seed : config.seeds) cells.push_back({nhat, seed});

  struct CellResult {
    std::vector<std::string> files;
    std::string error;
  };
  std::vector<CellResult> results(cells.size());

  const int workers = std::min<int>(worker_count_from_env(), static_cast<int>(cells.size()));
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  auto run_cells = [&]() {
    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      const Cell cell = cells[i];
      TrainConfig cell_cfg = config.train;
      cell_cfg.nhat = cell.nhat;
      cell_cfg.seed = cell.seed;
      try {
        const TrainState state = train(cell_cfg, config.task);
        const std::string ckpt_name = checkpoint_filename(cell.nhat, cell.seed);
        const std::string diag_name = diagnostics_filename(cell.nhat, cell.seed);
        save_checkpoint(path_in(config.output_dir, ckpt_name),
                        Checkpoint(cell_cfg, config.task, state.posterior));
        write_csv_file(path_in(config.output_dir, diag_name),
                       diagnostics_to_csv(state.diagnostics));
        results[i].files = {ckpt_name, diag_name};
        std::lock_guard<std::mutex> guard(log_mutex);
        log << "trained nhat=" << cell.nhat << " seed=" << cell.seed;
        if (!state.diagnostics.empty())
          log << " final_loss=" << state.diagnostics.back().loss
              << " regret_window=" << state.diagnostics.back().mean_regret_window;
        log << "\n";
      } catch (const std::exception& e) {
        results[i].error = e.what();
        std::lock_guard<std::mutex> guard(log_mutex);
        log << "cell nhat=" << cell.nhat << " seed=" << cell.seed << " failed: " << e.what()
            << "\n";
      }
    }
  };

  if (workers <= 1) {
    run_cells();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_cells);
    for (std::thread& t : pool) t.join();
  }

  std::vector<std::string> files;
  nlohmann::json failures = nlohmann::json::array();
  for (size_t i = 0; i < cells.size(); ++i) {
    files.insert(files.end(), results[i].files.begin(), results[i].files.end());
    if (!results[i].error.empty())
      failures.push_back({{"nhat", cells[i].nhat},
                          {"seed", cells[i].seed},
                          {"error", results[i].error}});
  }
  nlohmann::json extra;
  if (!failures.empty()) extra["failed_cells"] = failures;
  write_run_manifest(config.output_dir, "train", experiment_config_json(config), files, extra);
  return failures.empty() ? 0 : 1;
}

int cmd_simulate(const ExperimentConfig& config, const SimulateOptions& options,
                 std::ostream& log) {
  config.validate();
  if (options.episodes < 1) {
    log << "simulate: episodes must be >= 1\n";
    return 2;
  }
  const std::uint64_t seed = options.seed.value_or(config.train.seed);
  ensure_dir(options.output_dir);

  std::vector<Trajectory> trajectories;
  if (const auto kind = baseline_from_name(options.policy)) {
    trajectories = simulate_baseline(*kind, config.task, options.episodes, seed);
  } else if (options.policy == "lrla") {
    if (options.checkpoint.empty()) {
      log << "simulate: --ckpt is required for the lrla policy\n";
      return 2;
    }
    const Checkpoint ckpt = load_checkpoint(options.checkpoint);
    const EvalResult eval =
        evaluate(ckpt.posterior, ckpt.config, ckpt.dist, options.episodes,
                 options.map_mode ? EvalMode::kMap : EvalMode::kPosteriorSample, seed);
    trajectories = eval.trajectories;
    const std::string tag = "lrla_nhat" + std::to_string(ckpt.config.nhat) + "_seed" +
                            std::to_string(ckpt.config.seed);
    for (Trajectory& traj : trajectories) traj.source_tag = tag;
  } else {
    log << "simulate: unknown policy '" << options.policy << "'\n";
    return 2;
  }

  write_csv_file(path_in(options.output_dir, "trajectories.csv"),
                 trajectories_to_csv(trajectories, seed));
  nlohmann::json extra = {{"policy", options.policy},
                          {"episodes", options.episodes},
                          {"seed", seed}};
  write_run_manifest(options.output_dir, "simulate", experiment_config_json(config),
                     {"trajectories.csv"}, extra);
  return 0;
}

int cmd_fit_probit(const ExperimentConfig& config, const FitProbitOptions& options,
                   std::ostream& log) {
  config.validate();
  if (options.traj_file.empty() == options.human_file.empty()) {
    log << "fit-probit: exactly one of --traj / --human is required\n";
    return 2;
  }
  ensure_dir(options.output_dir);

  CsvTable out;
  out.header = kCoefficientHeader;
  nlohmann::json skipped = nlohmann::json::array();

  auto fit_entity = [&](const std::string& entity, const std::string& kind,
                        const std::string& nhat, const std::string& seed,
                        const std::vector<std::vector<std::pair<int, double>>>& episodes) {
    std::vector<ChoiceObservation> obs;
    for (const auto& episode : episodes) {
      const auto episode_obs = extract_observations(episode, config.task);
      obs.insert(obs.end(), episode_obs.begin(), episode_obs.end());
    }
    try {
      const ProbitFit fit = fit_probit(obs, config.analysis.ridge);
      if (!fit.converged)
        log << "fit-probit: entity " << entity << " flagged (ridge fallback "
            << fit.ridge_used << ")\n";
      out.rows.push_back(coefficient_row(entity, kind, nhat, seed, fit));
    } catch (const std::exception& e) {
      log << "fit-probit: entity " << entity << " failed: " << e.what() << "\n";
      skipped.push_back({{"entity", entity}, {"error", e.what()}});
    }
  };

  if (!options.human_file.empty()) {
    const HumanDataset dataset = load_human_data(options.human_file, config.task);
    for (const LoadDiagnostic& d : dataset.diagnostics)
      log << "fit-probit: " << options.human_file << ":" << d.line << ": " << d.message << "\n";
    for (const ParticipantData& p : dataset.participants)
      fit_entity(std::to_string(p.id), "human", "", "", p.episodes);
  } else {
    const auto entities = episodes_from_trajectory_csv(read_csv_file(options.traj_file));
    for (const auto& [tag, episodes] : entities) {
      int nhat = 0;
      unsigned long long seed = 0;
      if (parse_lrla_tag(tag, nhat, seed))
        fit_entity(tag, "lrla", std::to_string(nhat), std::to_string(seed), episodes);
      else
        fit_entity(tag, baseline_from_name(tag) ? "baseline" : "other", "", "", episodes);
    }
  }

  write_csv_file(path_in(options.output_dir, "coefficients.csv"), out);
  nlohmann::json extra;
  if (!skipped.empty()) extra["skipped_entities"] = skipped;
  write_run_manifest(options.output_dir, "fit-probit", experiment_config_json(config),
                     {"coefficients.csv"}, extra);
  return 0;
}

int cmd_compare(const ExperimentConfig& config, const CompareOptions& options,
                std::ostream& log) {
  config.validate();
  const std::vector<CheckpointFile> ckpts = scan_checkpoints(options.checkpoint_dir);
  if (ckpts.empty()) {
    log << "compare: no checkpoints found in " << options.checkpoint_dir << "\n";
    return 2;
  }
  const HumanDataset dataset = load_human_data(options.human_file, config.task);
  for (const LoadDiagnostic& d : dataset.diagnostics)
    log << "compare: " << options.human_file << ":" << d.line << ": " << d.message << "\n";
  if (dataset.participants.empty()) {
    log << "compare: no valid participants in " << options.human_file << "\n";
    return 2;
  }
  ensure_dir(options.output_dir);

  // probit surrogates per checkpoint, members grouped by nhat; the
  // unconstrained (nhat = 0) model is not part of the finite-nhat class
  std::map<int, Hypothesis> class_map;
  for (const CheckpointFile& file : ckpts) {
    if (file.nhat == 0) {
      log << "compare: skipping unconstrained checkpoint " << file.filename << "\n";
      continue;
    }
    const Checkpoint ckpt = load_checkpoint(path_in(options.checkpoint_dir, file.filename));
    const std::uint64_t sim_seed = RandomStream(ckpt.config.seed).derive("surrogate").next_u64();
    const ModelSurrogate surrogate =
        hypothesis_from_model(ckpt.posterior, ckpt.config, config.task,
                              config.analysis.sim_episodes, sim_seed, config.analysis.ridge);
    if (surrogate.degenerate)
      log << "compare: surrogate for " << file.filename << " is degenerate (one arm only)\n";
    Hypothesis& hyp = class_map[file.nhat];
    hyp.label = "lrla_nhat" + std::to_string(file.nhat);
    hyp.members.push_back(surrogate.w);
  }
  if (class_map.empty()) {
    log << "compare: no finite-nhat checkpoints to build the class from\n";
    return 2;
  }
  std::vector<Hypothesis> class_hyps;
  for (auto& [nhat, hyp] : class_map) class_hyps.push_back(hyp);

  const Hypothesis value = value_directed_hypothesis();
  const Hypothesis thompson = thompson_hypothesis();
  const Hypothesis ucb = ucb_hypothesis();

  CsvTable logliks;
  logliks.header = {"participant_id", "hypothesis", "loglik"};
  CsvTable factors;
  factors.header = {"participant_id", "log_bf", "two_log_bf", "best_nhat", "very_strong"};
  std::map<std::string, int> best_counts;

  for (const ParticipantData& participant : dataset.participants) {
    for (const Hypothesis& hyp : class_hyps)
      logliks.rows.push_back({std::to_string(participant.id), hyp.label,
                              format_double(marginal_loglik(participant, hyp, config.task))});
    for (const Hypothesis* hyp : {&value, &thompson, &ucb})
      logliks.rows.push_back({std::to_string(participant.id), hyp->label,
                              format_double(marginal_loglik(participant, *hyp, config.task))});

    const BayesFactorResult bf = bayes_factor(participant, class_hyps, value, config.task);
    best_counts[bf.best_hypothesis] += 1;
    factors.rows.push_back({std::to_string(participant.id), format_double(bf.log_bf),
                            format_double(bf.two_log_bf), bf.best_hypothesis,
                            bf.two_log_bf > 10.0 ? "1" : "0"});
  }

  CsvTable population;
  population.header = {"baseline", "two_log_bf"};
  for (const Hypothesis* baseline : {&thompson, &ucb, &value})
    population.rows.push_back(
        {baseline->label,
         format_double(population_bf(dataset.participants, class_hyps, *baseline, config.task))});

  CsvTable histogram;
  histogram.header = {"best_nhat", "participants"};
  for (const auto& [label, count] : best_counts)
    histogram.rows.push_back({label, std::to_string(count)});

  write_csv_file(path_in(options.output_dir, "logliks.csv"), logliks);
  write_csv_file(path_in(options.output_dir, "bayes_factors.csv"), factors);
  write_csv_file(path_in(options.output_dir, "population_bf.csv"), population);
  write_csv_file(path_in(options.output_dir, "best_nhat_hist.csv"), histogram);
  write_run_manifest(options.output_dir, "compare", experiment_config_json(config),
                     {"logliks.csv", "bayes_factors.csv", "population_bf.csv",
                      "best_nhat_hist.csv"});
  return 0;
}

int cmd_cluster(const ExperimentConfig& config, const ClusterOptions& options,
                std::ostream& log) {
  config.validate();
  const CsvTable table = read_csv_file(options.coefficients_file);
  auto column = [&](const std::string& name) {
    for (size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("cluster: missing column " + name + " in " +
                             options.coefficients_file);
  };
  const int id_col = column("entity_id");
  const int w_cols[3] = {column("w1"), column("w2"), column("w3")};

  std::vector<std::string> entities;
  std::vector<Eigen::Vector3d> points;
  std::vector<ProbitFit> fits;
  for (const auto& row : table.rows) {
    Eigen::Vector3d w;
    for (int i = 0; i < 3; ++i) w[i] = std::stod(row[w_cols[i]]);
    entities.push_back(row[id_col]);
    points.push_back(w);
    ProbitFit fit;
    fit.w = w;
    fits.push_back(fit);
  }
  if (points.empty()) {
    log << "cluster: no coefficient rows in " << options.coefficients_file << "\n";
    return 2;
  }

  double bandwidth = options.bandwidth.value_or(config.analysis.bandwidth);
  if (!(bandwidth > 0.0)) bandwidth = silverman_bandwidth(points);
  const ClusterResult clusters = mean_shift(points, bandwidth);
  ensure_dir(options.output_dir);

  CsvTable assignments;
  assignments.header = {"entity_id", "cluster"};
  for (size_t i = 0; i < entities.size(); ++i)
    assignments.rows.push_back({entities[i], std::to_string(clusters.assignments[i])});

  CsvTable modes;
  modes.header = {"cluster", "size", "w1", "w2", "w3", "prototype_entity"};
  for (size_t m = 0; m < clusters.modes.size(); ++m) {
    const int size = static_cast<int>(
        std::count(clusters.assignments.begin(), clusters.assignments.end(), static_cast<int>(m)));
    const int proto = prototype_of(clusters, fits, static_cast<int>(m));
    modes.rows.push_back({std::to_string(m), std::to_string(size),
                          format_double(clusters.modes[m][0]), format_double(clusters.modes[m][1]),
                          format_double(clusters.modes[m][2]), entities[proto]});
  }

  write_csv_file(path_in(options.output_dir, "cluster_assignments.csv"), assignments);
  write_csv_file(path_in(options.output_dir, "cluster_modes.csv"), modes);
  write_run_manifest(options.output_dir, "cluster", experiment_config_json(config),
                     {"cluster_assignments.csv", "cluster_modes.csv"},
                     {{"bandwidth", clusters.bandwidth}});
  return 0;
}

int cmd_regret(const ExperimentConfig& config, const RegretOptions& options,
               std::ostream& log) {
  config.validate();
  const std::vector<CheckpointFile> ckpts = scan_checkpoints(options.checkpoint_dir);
  if (ckpts.empty()) {
    log << "regret: no checkpoints found in " << options.checkpoint_dir << "\n";
    return 2;
  }
  ensure_dir(options.output_dir);

  CsvTable percell;
  percell.header = {"kind", "nhat", "seed", "episodes", "mean_regret"};
  std::map<int, std::pair<double, int>> by_nhat;  // nhat -> (sum, count)
  for (const CheckpointFile& file : ckpts) {
    const Checkpoint ckpt = load_checkpoint(path_in(options.checkpoint_dir, file.filename));
    const std::uint64_t eval_seed =
        RandomStream(ckpt.config.seed).derive("regret_eval").next_u64();
    const EvalResult eval = evaluate(ckpt.posterior, ckpt.config, config.task, options.episodes,
                                     EvalMode::kPosteriorSample, eval_seed);
    percell.rows.push_back({"lrla", std::to_string(file.nhat), std::to_string(file.seed),
                            std::to_string(options.episodes), format_double(eval.mean_regret)});
    auto& acc = by_nhat[file.nhat];
    acc.first += eval.mean_regret;
    acc.second += 1;
    log << "regret: nhat=" << file.nhat << " seed=" << file.seed << " mean=" << eval.mean_regret
        << "\n";
  }

  // reference rows: value-directed policy and the analytic random policy
  {
    const std::uint64_t seed = RandomStream(config.train.seed).derive("regret_value").next_u64();
    const std::vector<Trajectory> sims =
        simulate_baseline(BaselineKind::kValueDirected, config.task, options.episodes, seed);
    double total = 0.0;
    for (const Trajectory& traj : sims) total += episode_regret(traj);
    percell.rows.push_back({"value", "", "", std::to_string(options.episodes),
                            format_double(total / sims.size())});
  }
  percell.rows.push_back(
      {"random_analytic", "", "", "", format_double(random_policy_regret(config.task))});

  CsvTable summary;
  summary.header = {"nhat", "seeds", "mean_regret", "non_increasing_from_prev"};
  double prev = 0.0;
  bool have_prev = false;
  for (const auto& [nhat, acc] : by_nhat) {
    const double mean = acc.first / acc.second;
    std::string flag;
    if (nhat != 0) {  // the unconstrained model sits outside the nhat ordering
      flag = have_prev ? (mean <= prev ? "1" : "0") : "";
      prev = mean;
      have_prev = true;
    }
    summary.rows.push_back(
        {std::to_string(nhat), std::to_string(acc.second), format_double(mean), flag});
  }

  write_csv_file(path_in(options.output_dir, "regret.csv"), percell);
  write_csv_file(path_in(options.output_dir, "regret_summary.csv"), summary);
  write_run_manifest(options.output_dir, "regret", experiment_config_json(config),
                     {"regret.csv", "regret_summary.csv"},
                     {{"episodes", options.episodes}});
  return 0;
}

}  // namespace lrla
