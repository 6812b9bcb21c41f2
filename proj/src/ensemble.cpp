#include "nmqsd/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace nmqsd {

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NMQSD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

namespace {

struct BlockSums {
  int n = 0;
  std::vector<Matrix> sum_rho;
  std::vector<RealMatrix> sumsq_re, sumsq_im;
  std::vector<Real> sum_w, sumsq_w;
  std::vector<std::vector<Real>> sum_obs, sumsq_obs;
  std::vector<Vector> final_states;
  int n_absorbed = 0, n_trunc = 0, n_failed = 0;

  void init(int n_times, int dim, int n_obs) {
    sum_rho.assign(n_times, Matrix::Zero(dim, dim));
    sumsq_re.assign(n_times, RealMatrix::Zero(dim, dim));
    sumsq_im.assign(n_times, RealMatrix::Zero(dim, dim));
    sum_w.assign(n_times, 0.0);
    sumsq_w.assign(n_times, 0.0);
    sum_obs.assign(n_times, std::vector<Real>(n_obs, 0.0));
    sumsq_obs.assign(n_times, std::vector<Real>(n_obs, 0.0));
  }

  void add(const TrajectoryRecord& rec, bool collect_final) {
    ++n;
    for (size_t r = 0; r < rec.times.size(); ++r) {
      const Matrix proj = rec.states[r] * rec.states[r].adjoint();
      sum_rho[r] += proj;
      sumsq_re[r] += proj.real().cwiseAbs2();
      sumsq_im[r] += proj.imag().cwiseAbs2();
      sum_w[r] += rec.norm_sq[r];
      sumsq_w[r] += rec.norm_sq[r] * rec.norm_sq[r];
      for (size_t o = 0; o < rec.observables[r].size(); ++o) {
        const Real v = rec.observables[r][o].real();
        sum_obs[r][o] += v;
        sumsq_obs[r][o] += v * v;
      }
    }
    if (rec.absorbed) ++n_absorbed;
    if (rec.truncation_suspect) ++n_trunc;
    if (collect_final) final_states.push_back(rec.final_state);
  }

  void merge(const BlockSums& other) {
    n += other.n;
    for (size_t r = 0; r < sum_rho.size(); ++r) {
      sum_rho[r] += other.sum_rho[r];
      sumsq_re[r] += other.sumsq_re[r];
      sumsq_im[r] += other.sumsq_im[r];
      sum_w[r] += other.sum_w[r];
      sumsq_w[r] += other.sumsq_w[r];
      for (size_t o = 0; o < sum_obs[r].size(); ++o) {
        sum_obs[r][o] += other.sum_obs[r][o];
        sumsq_obs[r][o] += other.sumsq_obs[r][o];
      }
    }
    n_absorbed += other.n_absorbed;
    n_trunc += other.n_trunc;
    n_failed += other.n_failed;
    final_states.insert(final_states.end(), other.final_states.begin(),
                        other.final_states.end());
  }
};

}  // namespace

EnsembleResult run_ensemble(const ModelSpec& model, const CorrelationKernel& kernel,
                            const TimeGrid& grid, const EnsembleOptions& options) {
  if (options.n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1");
  TrajectoryOptions traj = options.trajectory;
  traj.record_states = true;

  // One probe run fixes the record layout (and surfaces config errors early).
  const TrajectoryRecord probe =
      run_trajectory(model, kernel, grid, derive_seed(options.master_seed, 0), traj);
  const int n_times = int(probe.times.size());
  const int n_obs = int(traj.observables.size());
  const int dim = model.dim();

  const int block_size = std::max(1, options.block_size);
  const int n_blocks = (options.n_trajectories + block_size - 1) / block_size;
  const int n_threads = std::min(resolve_thread_count(options.n_threads), n_blocks);

  BlockSums total;
  total.init(n_times, dim, n_obs);
  std::mutex mtx;
  std::map<int, BlockSums> pending;
  int next_merge = 0;

  std::atomic<int> next_block{0};
  const auto worker = [&] {
    for (;;) {
      const int b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      BlockSums sums;
      sums.init(n_times, dim, n_obs);
      const int lo = b * block_size;
      const int hi = std::min(options.n_trajectories, lo + block_size);
      for (int i = lo; i < hi; ++i) {
        try {
          const TrajectoryRecord rec =
              run_trajectory(model, kernel, grid, derive_seed(options.master_seed, i), traj);
          sums.add(rec, options.collect_final_states);
        } catch (const Error&) {
          ++sums.n_failed;
          if (options.collect_final_states) sums.final_states.push_back(Vector::Zero(dim));
        }
      }
      std::lock_guard<std::mutex> lock(mtx);
      pending.emplace(b, std::move(sums));
      while (!pending.empty() && pending.begin()->first == next_merge) {
        total.merge(pending.begin()->second);
        pending.erase(pending.begin());
        ++next_merge;
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (total.n_failed > 0 && Real(total.n_failed) > 0.01 * options.n_trajectories)
    throw NumericalBlowup("run_ensemble: more than 1% of trajectories failed");

  EnsembleResult out;
  out.times = probe.times;
  out.n = total.n;
  out.n_absorbed = total.n_absorbed;
  out.n_truncation_suspect = total.n_trunc;
  out.n_failed = total.n_failed;
  out.final_states = std::move(total.final_states);

  const Real n = Real(total.n);
  for (int r = 0; r < n_times; ++r) {
    Matrix mean = total.sum_rho[r] / n;
    mean = 0.5 * (mean + mean.adjoint().eval());  // enforce Hermiticity
    out.mean_rho.push_back(mean);
    RealMatrix se(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const Real mre = mean(i, j).real(), mim = mean(i, j).imag();
        const Real var_re = std::max(0.0, total.sumsq_re[r](i, j) / n - mre * mre);
        const Real var_im = std::max(0.0, total.sumsq_im[r](i, j) / n - mim * mim);
        se(i, j) = std::sqrt((var_re + var_im) / n);
      }
    out.se_rho.push_back(se);

    const Real mw = total.sum_w[r] / n;
    out.mean_norm.push_back(mw);
    out.se_norm.push_back(std::sqrt(std::max(0.0, total.sumsq_w[r] / n - mw * mw) / n));

    std::vector<Real> om(n_obs), os(n_obs);
    for (int o = 0; o < n_obs; ++o) {
      om[o] = total.sum_obs[r][o] / n;
      os[o] = std::sqrt(std::max(0.0, total.sumsq_obs[r][o] / n - om[o] * om[o]) / n);
    }
    out.obs_mean.push_back(std::move(om));
    out.obs_se.push_back(std::move(os));
  }
  return out;
}

std::vector<Real> cat_fidelity(const std::vector<Matrix>& rhos, const std::vector<Real>& times,
                               Complex beta, Real omega) {
  if (rhos.size() != times.size()) throw DimensionMismatch("cat_fidelity: size mismatch");
  std::vector<Real> out;
  out.reserve(rhos.size());
  for (size_t r = 0; r < rhos.size(); ++r) {
    const int d = int(rhos[r].rows());
    const Vector cat = cat_state(beta * std::exp(-I * omega * times[r]), d);
    const Real tr = rhos[r].trace().real();
    out.push_back((cat.adjoint() * rhos[r] * cat)(0).real() / (tr > 0 ? tr : 1.0));
  }
  return out;
}

}  // namespace nmqsd
