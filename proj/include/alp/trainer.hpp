#pragma once

// Actor-critic training loop with epsilon-greedy and parameter-noise
// exploration, one-step advantages and a per-episode Adam update.

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "alp/config.hpp"
#include "alp/data_io.hpp"
#include "alp/drl.hpp"
#include "alp/nn/adam.hpp"
#include "alp/report.hpp"

namespace alp::trainer {

struct TrainConfig {
  std::size_t episodes_per_scenario = 10000;
  std::vector<std::size_t> scenario_sizes{5, 10, 20, 30};
  std::size_t instances_per_scenario = 32;  // synthetic pool cycled through per scenario
  double gamma = 0.99;
  double entropy_coef = 0.02;
  double lr_start = 1e-4, lr_end = 1e-5;
  double eps_start = 0.9, eps_end = 0.3;
  std::size_t plateau_window = 500;
  double noise_sigma0 = 0.1;
  double noise_target = 0.1;
  double noise_adapt = 1.01;
  double clip = 10.0;
  std::uint64_t seed = 0;

  double tau() const { return static_cast<double>(episodes_per_scenario) / 3.0; }

  void check() const {
    if (!(gamma > 0 && gamma <= 1)) throw InvalidArgument("gamma must lie in (0, 1]");
    if (eps_end > eps_start) throw InvalidArgument("eps_end must not exceed eps_start");
    if (lr_end > lr_start) throw InvalidArgument("lr_end must not exceed lr_start");
    if (!(lr_end > 0)) throw InvalidArgument("learning rates must be positive");
    if (episodes_per_scenario == 0) throw InvalidArgument("episodes_per_scenario must be positive");
    if (!(noise_sigma0 > 0) || !(noise_adapt > 0)) throw InvalidArgument("noise parameters must be positive");
    if (!(clip > 0)) throw InvalidArgument("clip must be positive");
  }

  static TrainConfig from(const ConfigFile& f) {
    TrainConfig c;
    auto count = [&](const char* key, std::size_t dflt) {
      const double v = f.get(key, static_cast<double>(dflt));
      if (!(v >= 0) || v != std::floor(v)) throw ParseError(std::string(key) + " must be a non-negative integer");
      return static_cast<std::size_t>(v);
    };
    c.episodes_per_scenario = count("episodes_per_scenario", c.episodes_per_scenario);
    std::vector<double> sizes(c.scenario_sizes.begin(), c.scenario_sizes.end());
    sizes = f.get_list("scenario_sizes", sizes);
    c.scenario_sizes.clear();
    for (double s : sizes) {
      if (!(s >= 1) || s != std::floor(s)) throw ParseError("scenario_sizes must be positive integers");
      c.scenario_sizes.push_back(static_cast<std::size_t>(s));
    }
    c.instances_per_scenario = count("instances_per_scenario", c.instances_per_scenario);
    c.gamma = f.get("gamma", c.gamma);
    c.entropy_coef = f.get("entropy_coef", c.entropy_coef);
    c.lr_start = f.get("lr_start", c.lr_start);
    c.lr_end = f.get("lr_end", c.lr_end);
    c.eps_start = f.get("eps_start", c.eps_start);
    c.eps_end = f.get("eps_end", c.eps_end);
    c.plateau_window = count("plateau_window", c.plateau_window);
    c.noise_sigma0 = f.get("noise_sigma0", c.noise_sigma0);
    c.noise_target = f.get("noise_target", c.noise_target);
    c.noise_adapt = f.get("noise_adapt", c.noise_adapt);
    c.clip = f.get("clip", c.clip);
    c.check();
    return c;
  }
};

inline double epsilon(double t, const TrainConfig& c) {
  if (t < 0) throw InvalidArgument("schedule step must be >= 0");
  return c.eps_end + (c.eps_start - c.eps_end) * std::exp(-t / c.tau());
}

inline double learning_rate(double t, const TrainConfig& c) {
  if (t < 0) throw InvalidArgument("schedule step must be >= 0");
  return c.lr_end + (c.lr_start - c.lr_end) * std::exp(-t / c.tau());
}

/// Gaussian perturbations of the actor weights, keyed by store index.
inline std::map<std::size_t, nn::Tensor> actor_noise(const nn::ParameterStore& store, double sigma, Rng& rng) {
  if (sigma < 0) throw InvalidArgument("noise scale must be >= 0");
  std::map<std::size_t, nn::Tensor> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!policy::is_actor_parameter(store[i].name)) continue;
    nn::Tensor t = store[i].value;
    for (auto& x : t.values()) x += sigma * rng.normal();
    out.emplace(i, std::move(t));
  }
  return out;
}

/// Copy of `store` with perturbed actor weights.
inline nn::ParameterStore perturb_parameters(const nn::ParameterStore& store, double sigma, Rng& rng) {
  nn::ParameterStore noisy = store;
  for (auto& [i, t] : actor_noise(store, sigma, rng)) noisy[i].value = std::move(t);
  return noisy;
}

inline double adapt_noise(double sigma, double d_measured, const TrainConfig& c) {
  if (!(sigma > 0)) throw InvalidArgument("noise scale must be > 0");
  const double diff = c.noise_target - d_measured;
  const int sign = (diff > 0) - (diff < 0);
  return sigma * std::pow(c.noise_adapt, sign);
}

/// r + gamma V(s') - V(s), with V(s') = 0 at episode end.
inline double advantage(double reward, double value, double next_value, bool done, double gamma) {
  return reward + (done ? 0.0 : gamma * next_value) - value;
}

struct Transition {
  StateGraph state;
  std::size_t aircraft = 0;
  double u = 0;  // pre-mapping action value
  Seconds t = 0;
  double reward = 0;
  bool done = false;
  bool random = false;  // epsilon-greedy draw, not sampled from the policy
};

/// Actor and critic loss terms for one transition on a recording tape.
struct LossTerms {
  nn::Var actor, critic;
};

inline LossTerms transition_loss(policy::Bound& p, const Transition& tr, double adv, double target,
                                 double entropy_coef, const policy::PolicyConfig& pcfg = {}) {
  const nn::Var z = policy::encode(p, tr.state, pcfg);
  const nn::Var out = nn::row(policy::actor_head(p, z), tr.aircraft);
  const nn::Var mu = nn::slice_cols(out, 0, 1);
  const nn::Var log_sigma = nn::slice_cols(out, 1, 1);
  const nn::Var lp = policy::log_prob(mu, log_sigma, tr.u);
  const nn::Var h = policy::entropy(log_sigma);
  const nn::Var actor = nn::sub(nn::scale(lp, tr.random ? 0.0 : -adv), nn::scale(h, entropy_coef));
  const nn::Var v = policy::critic_head(p, z);
  const nn::Var critic = nn::square(nn::add_scalar(nn::scale(v, -1.0), target));
  return {actor, critic};
}

/// Mean actor + critic loss gradients over an episode.
inline nn::Gradients episode_gradients(const nn::ParameterStore& store, const std::vector<Transition>& batch,
                                       const TrainConfig& cfg, const policy::PolicyConfig& pcfg = {},
                                       double* loss_out = nullptr) {
  if (batch.empty()) throw InvalidArgument("empty transition batch");
  std::vector<double> values(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) values[k] = policy::state_value(store, batch[k].state, pcfg);
  nn::Gradients grads(store);
  double loss_sum = 0;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& tr = batch[k];
    const double next_v = (tr.done || k + 1 >= batch.size()) ? 0.0 : values[k + 1];
    const double target = tr.reward + (tr.done ? 0.0 : cfg.gamma * next_v);
    const double adv = target - values[k];
    nn::Tape tape;
    policy::Bound p(tape, store);
    const auto terms = transition_loss(p, tr, adv, target, cfg.entropy_coef, pcfg);
    const nn::Var loss = nn::scale(nn::add(terms.actor, terms.critic), w);
    loss_sum += loss.value().item();
    tape.backward(loss);
    tape.accumulate_gradients(grads);
  }
  if (loss_out) *loss_out = loss_sum;
  return grads;
}

struct LogRow {
  std::size_t episode = 0;
  double reward = 0, cost = 0, avg_delay_s = 0, epsilon = 0, lr = 0, noise_sigma = 0;
};

inline constexpr const char* kTrainLogHeader = "episode,reward,cost,avg_delay_s,epsilon,lr,noise_sigma";

inline std::string write_train_log(const std::vector<LogRow>& rows) {
  using detail::format_double;
  std::ostringstream os;
  os << kTrainLogHeader << '\n';
  for (const auto& r : rows)
    os << r.episode << ',' << format_double(r.reward) << ',' << format_double(r.cost) << ','
       << format_double(r.avg_delay_s) << ',' << format_double(r.epsilon) << ',' << format_double(r.lr) << ','
       << format_double(r.noise_sigma) << '\n';
  return os.str();
}

inline std::vector<LogRow> read_train_log(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t row = 1;
  if (!std::getline(is, line) || detail::split_csv_line(line) != detail::split_csv_line(kTrainLogHeader))
    throw ParseError("training log header mismatch", 1);
  std::vector<LogRow> out;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw ParseError("training log row needs 7 fields", row);
    LogRow r;
    r.episode = static_cast<std::size_t>(detail::parse_double(f[0], row));
    r.reward = detail::parse_double(f[1], row);
    r.cost = detail::parse_double(f[2], row);
    r.avg_delay_s = detail::parse_double(f[3], row);
    r.epsilon = detail::parse_double(f[4], row);
    r.lr = detail::parse_double(f[5], row);
    r.noise_sigma = detail::parse_double(f[6], row);
    out.push_back(r);
  }
  return out;
}

/// Training data: fixed instances (one scenario) or synthetic scenarios
/// generated per curriculum size from `synthetic`.
struct TrainData {
  std::vector<Instance> instances;
  std::optional<ScenarioSpec> synthetic;
  std::optional<nn::ParameterStore> initial;  // warm start instead of fresh weights
};

struct SkippedEpisode {
  std::size_t episode;
  std::string instance;
  std::string reason;
};

struct TrainResult {
  nn::ParameterStore store;
  std::vector<LogRow> log;
  std::vector<SkippedEpisode> skipped;
};

struct EpisodeStats {
  double reward = 0, cost = 0, avg_delay = 0;
  double noise_distance = 0;  // mean normalized |t_noisy - t_clean|
  std::size_t noisy_steps = 0;
};

/// Runs one exploration episode, appending its transitions to `batch`.
/// Each policy step uses a fresh actor perturbation.
inline EpisodeStats run_episode(const env::Environment& env, const nn::ParameterStore& store, double eps,
                                double noise_sigma, Rng& rng, std::vector<Transition>& batch,
                                const policy::PolicyConfig& pcfg = {}, const safety::AssignmentConfig& scfg = {}) {
  EpisodeStats st;
  env::EnvState state = env.reset();
  while (!state.done()) {
    Transition tr;
    tr.state = build_graph(state, env.features());
    const std::size_t i = env.next_aircraft(state);
    const auto& a = env.instance()[i];
    tr.aircraft = i;
    if (rng.bernoulli(eps)) {
      tr.t = rng.uniform(a.earliest, a.latest);
      tr.u = policy::unmap_from_window(tr.t, a.earliest, a.latest);
      tr.random = true;
    } else {
      const auto noise = actor_noise(store, noise_sigma, rng);
      const auto clean = policy::evaluate(store, tr.state, pcfg, false);
      const auto noisy = policy::evaluate(store, tr.state, pcfg, false, &noise);
      const auto dist = policy::act(noisy.mu[i], noisy.log_sigma[i], a.earliest, a.latest);
      const auto s = policy::sample_action(dist, a.earliest, a.latest, rng);
      tr.u = s.u;
      tr.t = s.t;
      if (a.latest > a.earliest) {
        const Seconds t_clean = policy::map_to_window(clean.mu[i], a.earliest, a.latest);
        st.noise_distance += std::abs(dist.t - t_clean) / (a.latest - a.earliest);
      }
      ++st.noisy_steps;
    }
    auto step = drl::apply_action(env, state, i, tr.t, scfg);
    tr.reward = step.reward;
    st.reward += step.reward;
    state = std::move(step.next);
    tr.done = state.done();
    batch.push_back(std::move(tr));
  }
  const Instance& inst = env.instance();
  st.cost = total_cost(inst, state.schedule);
  for (std::size_t i = 0; i < inst.size(); ++i) st.avg_delay += std::max(0.0, state.schedule.at(i) - inst[i].target);
  st.avg_delay /= static_cast<double>(inst.size());
  if (st.noisy_steps) st.noise_distance /= static_cast<double>(st.noisy_steps);
  return st;
}

/// Called after each logged episode; returning false stops training.
using ProgressFn = std::function<bool(const LogRow&)>;

inline TrainResult train(const TrainData& data, const TrainConfig& cfg, const env::EnvConfig& ecfg = {},
                         const policy::PolicyConfig& pcfg = {}, const safety::AssignmentConfig& scfg = {},
                         const ProgressFn& progress = {}) {
  cfg.check();
  if (data.instances.empty() && !data.synthetic) throw InvalidArgument("no training data");
  Rng rng(cfg.seed);
  TrainResult out;
  out.store = policy::init_parameters(pcfg, rng);
  if (data.initial) {
    if (!data.initial->same_layout(out.store)) throw InvalidArgument("initial weights do not match the policy layout");
    out.store = *data.initial;
  }
  double sigma = cfg.noise_sigma0;
  std::size_t global = 0;

  // One scenario per curriculum size (synthetic) or a single scenario over the
  // given instances.
  std::vector<std::vector<std::shared_ptr<const Instance>>> scenarios;
  if (!data.instances.empty()) {
    scenarios.emplace_back();
    for (const auto& inst : data.instances) scenarios.back().push_back(std::make_shared<Instance>(inst));
  } else {
    for (std::size_t k = 0; k < cfg.scenario_sizes.size(); ++k) {
      scenarios.emplace_back();
      for (std::size_t j = 0; j < std::max<std::size_t>(1, cfg.instances_per_scenario); ++j) {
        ScenarioSpec spec = *data.synthetic;
        spec.count = cfg.scenario_sizes[k];
        spec.seed = data.synthetic->seed * 1000003ULL + k * 7919ULL + j;
        scenarios.back().push_back(std::make_shared<Instance>(synthesize(spec)));
      }
    }
  }

  for (const auto& pool : scenarios) {
    std::vector<env::Environment> envs;
    for (const auto& inst : pool) envs.emplace_back(inst, ecfg);
    std::deque<double> window;
    double window_sum = 0, best_avg = -INFINITY;
    std::size_t since_best = 0;
    for (std::size_t ep = 0; ep < cfg.episodes_per_scenario; ++ep) {
      const auto& env = envs[ep % envs.size()];
      const double eps = epsilon(static_cast<double>(ep), cfg);
      const double lr = learning_rate(static_cast<double>(ep), cfg);
      std::vector<Transition> batch;
      EpisodeStats st;
      try {
        st = run_episode(env, out.store, eps, sigma, rng, batch, pcfg, scfg);
      } catch (const InfeasibleInstance& e) {
        out.skipped.push_back({global++, env.instance().name(), e.what()});
        continue;
      }
      LogRow row{global, st.reward, st.cost, st.avg_delay, eps, lr, sigma};
      nn::AdamConfig acfg;
      acfg.lr = lr;
      acfg.clip = cfg.clip;
      nn::adam_step(out.store, episode_gradients(out.store, batch, cfg, pcfg), acfg);
      if (st.noisy_steps) sigma = adapt_noise(sigma, st.noise_distance, cfg);
      out.log.push_back(row);
      ++global;
      if (progress && !progress(row)) return out;

      // Plateau: the moving average of episode reward has not improved for
      // plateau_window episodes.
      if (cfg.plateau_window > 0) {
        window.push_back(st.reward);
        window_sum += st.reward;
        if (window.size() > cfg.plateau_window) {
          window_sum -= window.front();
          window.pop_front();
        }
        if (window.size() == cfg.plateau_window) {
          const double avg = window_sum / static_cast<double>(window.size());
          if (avg > best_avg) {
            best_avg = avg;
            since_best = 0;
          } else if (++since_best >= cfg.plateau_window) {
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace alp::trainer
