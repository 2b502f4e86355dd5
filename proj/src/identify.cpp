#include "fonbw/identify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "fonbw/errors.hpp"

namespace fonbw {

double rms_error(const TimeSeries& measured, const TimeSeries& model) {
  if (measured.size() != model.size()) throw InvalidArgument("rms_error needs series of equal length");
  double acc = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = measured[i] - model[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(measured.size()));
}

void DeConfig::validate(std::size_t dimension) const {
  if (population_size < 4) throw InvalidArgument("population size must be at least 4");
  if (bounds.size() != dimension)
    throw InvalidArgument("expected " + std::to_string(dimension) + " parameter bounds, got " +
                          std::to_string(bounds.size()));
  for (const auto& b : bounds)
    if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi))
      throw InvalidArgument("each parameter bound needs finite lo < hi");
  if (!(cr_init >= 0.0 && cr_init <= 1.0)) throw InvalidArgument("crossover rate must lie in [0, 1]");
  if (!(tau1 >= 0.0 && tau1 <= 1.0 && tau2 >= 0.0 && tau2 <= 1.0))
    throw InvalidArgument("self-adaptation probabilities must lie in [0, 1]");
  if (!(f_lo > 0.0 && f_lo <= f_hi)) throw InvalidArgument("mutation factor range must satisfy 0 < f_lo <= f_hi");
  if (!(f_init > 0.0)) throw InvalidArgument("initial mutation factor must be positive");
}

IdentificationProblem::IdentificationProblem(ModelKind kind, TimeSeries u, TimeSeries H, std::size_t order,
                                             SimOptions options)
    : model_kind(kind), data_u(std::move(u)), data_H(std::move(H)), poly_order(order), sim(options) {
  if (!data_u.same_grid(data_H)) throw InvalidArgument("input and measured output must share one grid");
  if ((kind == ModelKind::Anbw || kind == ModelKind::Fonbw) && poly_order == 0)
    throw InvalidArgument("polynomial order must be at least 1");
}

std::vector<std::string> IdentificationProblem::theta_names() const { return fonbw::theta_names(model_kind, poly_order); }

std::vector<std::string> theta_names(ModelKind kind, std::size_t poly_order) {
  auto poly = [&] {
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= poly_order; ++i) v.push_back("k_u" + std::to_string(i));
    return v;
  };
  std::vector<std::string> names;
  switch (kind) {
    case ModelKind::Cbw: return {"k_a", "k_b", "D", "A", "beta", "gamma", "n"};
    case ModelKind::Nbw: return {"k_u", "k_h", "rho", "sigma", "n"};
    case ModelKind::Anbw:
      names = poly();
      names.insert(names.end(), {"k_h", "rho", "sigma", "n"});
      return names;
    case ModelKind::Fonbw:
      names = poly();
      names.insert(names.end(), {"k_h", "rho", "sigma", "n", "lambda1", "lambda2"});
      return names;
    case ModelKind::Zhu: return {"m0", "c0", "k0", "k1", "x0", "tau", "A", "beta", "gamma", "delta", "n"};
  }
  return names;
}

ModelParams params_from_theta(ModelKind kind, std::span<const double> t, std::size_t poly_order) {
  const std::size_t dim = theta_names(kind, poly_order).size();
  if (t.size() != dim)
    throw InvalidArgument("theta has " + std::to_string(t.size()) + " entries, model needs " + std::to_string(dim));
  switch (kind) {
    case ModelKind::Cbw: return CbwGainParams{t[0], t[1], t[2], t[3], t[4], t[5], t[6], 0.0};
    case ModelKind::Nbw: return NbwParams{t[0], t[1], t[2], t[3], t[4], 0.0};
    case ModelKind::Anbw: {
      AnbwParams p;
      p.poly.coeffs.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(poly_order));
      const auto r = t.subspan(poly_order);
      p.nbw = NbwParams{0.0, r[0], r[1], r[2], r[3], 0.0};
      return p;
    }
    case ModelKind::Fonbw: {
      FonbwParams p;
      p.poly.coeffs.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(poly_order));
      const auto r = t.subspan(poly_order);
      p.k_h = r[0];
      p.rho = r[1];
      p.sigma = r[2];
      p.n = r[3];
      p.lambda1 = r[4];
      p.lambda2 = r[5];
      return p;
    }
    case ModelKind::Zhu: {
      ZhuParams p;
      p.m0 = t[0];
      p.c0 = t[1];
      p.k0 = t[2];
      p.k1 = t[3];
      p.x0 = t[4];
      p.tau = t[5];
      p.A = t[6];
      p.beta = t[7];
      p.gamma = t[8];
      p.delta = t[9];
      p.n = t[10];
      return p;
    }
  }
  throw InvalidArgument("unknown model kind");
}

std::vector<double> theta_from_params(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CbwGainParams>) {
          return {p.k_a, p.k_b, p.D, p.A, p.beta, p.gamma, p.n};
        } else if constexpr (std::is_same_v<T, NbwParams>) {
          return {p.k_u, p.k_h, p.rho, p.sigma, p.n};
        } else if constexpr (std::is_same_v<T, AnbwParams>) {
          std::vector<double> v = p.poly.coeffs;
          v.insert(v.end(), {p.nbw.k_h, p.nbw.rho, p.nbw.sigma, p.nbw.n});
          return v;
        } else if constexpr (std::is_same_v<T, FonbwParams>) {
          std::vector<double> v = p.poly.coeffs;
          v.insert(v.end(), {p.k_h, p.rho, p.sigma, p.n, p.lambda1, p.lambda2});
          return v;
        } else {
          return {p.m0, p.c0, p.k0, p.k1, p.x0, p.tau, p.A, p.beta, p.gamma, p.delta, p.n};
        }
      },
      params);
}

double evaluate_candidate(const IdentificationProblem& problem, std::span<const double> theta) {
  const ModelParams params = params_from_theta(problem.model_kind, theta, problem.poly_order);
  try {
    const TimeSeries model = simulate(params, problem.data_u, problem.sim);
    const double j = rms_error(problem.data_H, model);
    return std::isfinite(j) ? j : kPenaltyObjective;
  } catch (const DivergenceError&) {
  } catch (const SolverError&) {
  } catch (const InvalidArgument&) {
    // Candidates violating model invariants are ranked like diverged ones.
  }
  return kPenaltyObjective;
}

namespace {

void evaluate_all(const IdentificationProblem& problem, const std::vector<std::vector<double>>& xs,
                  std::vector<double>& out, std::size_t threads) {
  out.resize(xs.size());
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, xs.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate_candidate(problem, xs[i]);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < xs.size(); i += workers) out[i] = evaluate_candidate(problem, xs[i]);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

IdentificationResult identify(const IdentificationProblem& problem, const DeConfig& cfg) {
  const std::size_t dim = problem.dimension();
  cfg.validate(dim);
  const std::size_t np = cfg.population_size;
  const bool use_target = cfg.target_objective && std::isfinite(*cfg.target_objective);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& x : pop)
    for (std::size_t j = 0; j < dim; ++j) x[j] = cfg.bounds[j].lo + unit(rng) * (cfg.bounds[j].hi - cfg.bounds[j].lo);
  std::vector<double> f_ind(np, cfg.f_init), cr_ind(np, cfg.cr_init);

  std::vector<double> cost;
  evaluate_all(problem, pop, cost, cfg.threads);

  IdentificationResult res;
  res.seed = cfg.seed;
  res.evaluations = np;
  auto best_index = [&] { return static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin()); };
  res.objective_trace.push_back(cost[best_index()]);

  std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
  std::vector<double> trial_f(np), trial_cr(np), trial_cost;
  for (std::size_t gen = 1; gen <= cfg.max_generations; ++gen) {
    if (use_target && res.objective_trace.back() <= *cfg.target_objective) break;

    for (std::size_t i = 0; i < np; ++i) {
      trial_f[i] = unit(rng) < cfg.tau1 ? cfg.f_lo + unit(rng) * (cfg.f_hi - cfg.f_lo) : f_ind[i];
      trial_cr[i] = unit(rng) < cfg.tau2 ? unit(rng) : cr_ind[i];
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t jrand = pick_dim(rng);
      for (std::size_t j = 0; j < dim; ++j) {
        const bool take = unit(rng) < trial_cr[i] || j == jrand;
        double v = take ? pop[r1][j] + trial_f[i] * (pop[r2][j] - pop[r3][j]) : pop[i][j];
        trials[i][j] = std::clamp(v, cfg.bounds[j].lo, cfg.bounds[j].hi);
      }
    }

    evaluate_all(problem, trials, trial_cost, cfg.threads);
    res.evaluations += np;

    for (std::size_t i = 0; i < np; ++i) {
      if (trial_cost[i] <= cost[i]) {
        pop[i].swap(trials[i]);
        cost[i] = trial_cost[i];
        f_ind[i] = trial_f[i];
        cr_ind[i] = trial_cr[i];
      }
    }
    res.objective_trace.push_back(cost[best_index()]);
    res.generations = gen;
  }

  const std::size_t b = best_index();
  res.best_theta = pop[b];
  res.best_objective = cost[b];
  return res;
}

}  // namespace fonbw
