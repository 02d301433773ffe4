#include "ruelle/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

#include <boost/math/tools/roots.hpp>

#include "ruelle/toric.hpp"

namespace ruelle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point face_point(int n, const std::vector<int>& support, const Point& w) {
  Point u = Point::Zero(n);
  for (std::size_t k = 0; k < support.size(); ++k) u(support[k]) = w(k);
  return u;
}

double snap(double theta, double tol) {
  if (!std::isfinite(theta)) return theta;
  const double r = std::round(theta);
  return std::abs(theta - r) <= tol ? r : theta;
}

class Enumerator {
 public:
  Enumerator(const MomentRegion& region, double t_max, const OrbitOptions& opts)
      : region_(region), f_(region), n_(region.dim()), t_max_(t_max),
        opts_(opts) {}

  OrbitEnumeration run() {
    for (long mask = 1; mask < (1L << n_); ++mask) {
      std::vector<int> support;
      for (int i = 0; i < n_; ++i) {
        if (mask & (1L << i)) support.push_back(i);
      }
      if (support.size() == 1) {
        axis(support[0]);
      } else if (region_.is_linear()) {
        linear_stratum(support);
      } else if (support.size() == 2) {
        planar_stratum(support);
      } else {
        general_stratum(support);
      }
    }
    return std::move(out_);
  }

 private:
  // Records the orbit at face direction u with support windings k.
  void record(const std::vector<int>& support, const Point& u,
              const std::vector<long>& k, bool family) {
    const Point g = f_.gradient(u);
    const double period = static_cast<double>(k[0]) / g(support[0]);
    if (!(period <= t_max_ * (1.0 + 1e-12))) return;
    OrbitRecord r;
    r.support = support;
    r.moment_point = f_.radius(u) * u;
    r.period = period;
    r.rotation = Point::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      double theta = period * g(j);
      // Off-support derivatives may be +inf on a coordinate face; NaN only
      // arises from inf * 0 in the same situation.
      if (std::isnan(theta)) theta = kInf;
      r.rotation(j) = snap(theta, opts_.integer_tol);
    }
    for (std::size_t a = 0; a < support.size(); ++a) {
      if (std::abs(r.rotation(support[a]) - static_cast<double>(k[a])) >
          opts_.integer_tol * std::max(1.0, double(k[a]))) {
        return;  // not closed to tolerance
      }
      r.rotation(support[a]) = static_cast<double>(k[a]);
    }
    r.family = family || support.size() >= 2;
    for (int j = 0; j < n_; ++j) {
      if (std::find(support.begin(), support.end(), j) != support.end()) continue;
      const double t = r.rotation(j);
      if (std::isfinite(t) && t == std::round(t)) r.family = true;
    }
    out_.records.push_back(std::move(r));
  }

  bool spend() {
    if (used_ >= opts_.budget) {
      out_.truncated = true;
      return false;
    }
    ++used_;
    ++out_.candidates;
    return true;
  }

  void axis(int i) {
    used_ = 0;
    Point u = Point::Zero(n_);
    u(i) = 1.0;
    const double r = f_.radius(u);  // d_i f = 1 / r on the axis
    const long kmax = static_cast<long>(std::floor(t_max_ / r * (1.0 + 1e-12)));
    for (long k = 1; k <= kmax; ++k) {
      if (!spend()) return;
      record({i}, u, {k}, false);
    }
  }

  // Constant gradient: the whole stratum closes up simultaneously.
  void linear_stratum(const std::vector<int>& support) {
    used_ = 0;
    const int s = static_cast<int>(support.size());
    Point w = Point::Constant(s, 1.0 / s);
    const Point u = face_point(n_, support, w);
    const Point g = f_.gradient(u);
    const long kmax =
        static_cast<long>(std::floor(t_max_ * g(support[0]) * (1.0 + 1e-12)));
    for (long k0 = 1; k0 <= kmax; ++k0) {
      if (!spend()) return;
      const double period = k0 / g(support[0]);
      std::vector<long> k(s);
      bool closed = true;
      for (int a = 0; a < s; ++a) {
        const double theta = period * g(support[a]);
        k[a] = std::lround(theta);
        if (k[a] < 1 ||
            std::abs(theta - k[a]) > opts_.integer_tol * std::max(1.0, theta)) {
          closed = false;
        }
      }
      if (closed) record(support, u, k, true);
    }
  }

  void planar_stratum(const std::vector<int>& support) {
    used_ = 0;
    const int i = support[0], j = support[1];
    auto dir = [&](double t) {
      Point w(2);
      w << t, 1.0 - t;
      return face_point(n_, support, w);
    };
    auto ratio = [&](double t) {
      const Point g = f_.gradient(dir(t));
      return g(i) / g(j);
    };
    // Uniform grid refined geometrically towards both faces.
    std::vector<double> ts;
    const int m = std::max(4, opts_.grid);
    for (int q = 30; q >= 1; --q) ts.push_back(std::ldexp(1.0 / m, -q));
    for (int q = 1; q < m; ++q) ts.push_back(double(q) / m);
    for (int q = 1; q <= 30; ++q) ts.push_back(1.0 - std::ldexp(1.0 / m, -q));
    std::vector<double> rho(ts.size());
    double gi_max = 0.0, gj_max = 0.0;
    for (std::size_t q = 0; q < ts.size(); ++q) {
      const Point g = f_.gradient(dir(ts[q]));
      rho[q] = g(i) / g(j);
      gi_max = std::max(gi_max, g(i));
      gj_max = std::max(gj_max, g(j));
    }
    const long ki_max = static_cast<long>(std::floor(t_max_ * gi_max));
    const long kj_max = static_cast<long>(std::floor(t_max_ * gj_max));
    const auto [rho_lo, rho_hi] = std::minmax_element(rho.begin(), rho.end());
    // Increasing k_i + k_j, so a truncated scan drops the largest windings.
    for (long total = 2; total <= ki_max + kj_max; ++total) {
      for (long ki = std::max(1L, total - kj_max); ki <= std::min(ki_max, total - 1);
           ++ki) {
        const long kj = total - ki;
        if (!spend()) return;
        const double target = double(ki) / double(kj);
        if (target < *rho_lo || target > *rho_hi) continue;
        double last_root = -1.0;
        for (std::size_t q = 0; q + 1 < ts.size(); ++q) {
          const double da = rho[q] - target;
          const double db = rho[q + 1] - target;
          if (!(da * db <= 0.0)) continue;
          if (da == 0.0 && db == 0.0) continue;  // flat: no isolated root
          double root = da == 0.0 ? ts[q] : ts[q + 1];
          if (da != 0.0 && db != 0.0) {
            boost::uintmax_t iters = 100;
            const auto br = boost::math::tools::toms748_solve(
                [&](double t) { return ratio(t) - target; }, ts[q], ts[q + 1],
                da, db, boost::math::tools::eps_tolerance<double>(52), iters);
            root = 0.5 * (br.first + br.second);
          }
          if (std::abs(root - last_root) < 1e-12) continue;
          last_root = root;
          record(support, dir(root), {ki, kj}, true);
        }
      }
    }
  }

  // Solves gradient direction = k / |k| on the open face by damped Newton.
  // Returns false if the iteration leaves the face.
  bool newton(const std::vector<int>& support, const Point& khat, Point& w) {
    const int s = static_cast<int>(support.size());
    auto residual = [&](const Point& ww, Point& ghat) {
      const Point g = f_.gradient(face_point(n_, support, ww));
      double total = 0.0;
      for (int a = 0; a < s; ++a) total += g(support[a]);
      ghat.resize(s);
      for (int a = 0; a < s; ++a) ghat(a) = g(support[a]) / total;
      return (ghat - khat).head(s - 1).cwiseAbs().maxCoeff();
    };
    Point ghat;
    double res = residual(w, ghat);
    for (int it = 0; it < 100; ++it) {
      if (res < 1e-12) return true;
      const Point u = face_point(n_, support, w);
      const Point g = f_.gradient(u);
      const PointMatrix h = f_.hessian(u);
      double total = 0.0;
      for (int a = 0; a < s; ++a) total += g(support[a]);
      Eigen::MatrixXd jac(s - 1, s - 1);
      for (int b = 0; b < s - 1; ++b) {
        Eigen::VectorXd dg(s);
        for (int c = 0; c < s; ++c) {
          dg(c) = h(support[c], support[b]) - h(support[c], support[s - 1]);
        }
        const double dsum = dg.sum();
        for (int a = 0; a < s - 1; ++a) {
          jac(a, b) = (dg(a) - ghat(a) * dsum) / total;
        }
      }
      const Eigen::VectorXd rhs = -(ghat - khat).head(s - 1);
      const Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
      double lambda = 1.0;
      bool accepted = false;
      for (int tries = 0; tries < 40; ++tries, lambda *= 0.5) {
        Point trial = w;
        for (int a = 0; a < s - 1; ++a) trial(a) += lambda * step(a);
        trial(s - 1) = 1.0 - trial.head(s - 1).sum();
        if (trial.minCoeff() <= 0.0) continue;
        Point gt;
        const double rt = residual(trial, gt);
        if (rt < res) {
          w = trial;
          ghat = gt;
          res = rt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Every admissible step either leaves the face or fails to reduce
        // the residual; the former means the root lies outside.
        Point full = w;
        for (int a = 0; a < s - 1; ++a) full(a) += step(a);
        full(s - 1) = 1.0 - full.head(s - 1).sum();
        if (full.minCoeff() <= 0.0) return false;
        throw Error(ErrorCode::ResolutionTooCoarse,
                    "Newton stalled at residual " + std::to_string(res));
      }
    }
    if (res < 1e-9) return true;
    throw Error(ErrorCode::ResolutionTooCoarse,
                "Newton did not converge, residual " + std::to_string(res));
  }

  void general_stratum(const std::vector<int>& support) {
    used_ = 0;
    const int s = static_cast<int>(support.size());
    // Keep the stratum grid below ~5e4 directions.
    int m = std::max(s + 1, opts_.grid);
    auto count = [&](int mm) {
      double c = 1.0;
      for (int q = 1; q <= s - 1; ++q) c = c * (mm - 1 - (s - 1) + q) / q;
      return c;
    };
    while (m > s + 1 && count(m) > 5e4) --m;
    std::vector<Point> grid_w, grid_hat;
    Point gmax = Point::Zero(s);
    std::vector<int> k(s, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == s - 1) {
        k[pos] = left;
        Point w(s);
        for (int a = 0; a < s; ++a) w(a) = double(k[a]) / m;
        const Point g = f_.gradient(face_point(n_, support, w));
        Point gh(s);
        double total = 0.0;
        for (int a = 0; a < s; ++a) total += g(support[a]);
        for (int a = 0; a < s; ++a) {
          gh(a) = g(support[a]) / total;
          gmax(a) = std::max(gmax(a), g(support[a]));
        }
        grid_w.push_back(w);
        grid_hat.push_back(gh);
        return;
      }
      for (int v = 1; v <= left - (s - 1 - pos); ++v) {
        k[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, m);

    std::vector<long> kmax(s);
    long kmax_total = 0;
    for (int a = 0; a < s; ++a) {
      kmax[a] = static_cast<long>(std::floor(t_max_ * gmax(a)));
      if (kmax[a] < 1) return;
      kmax_total += kmax[a];
    }
    // Nearest grid directions through buckets of width 1/m on the first
    // s - 1 simplex coordinates.
    auto bucket_key = [&](const Point& h) {
      long key = 0;
      for (int a = 0; a < s - 1; ++a) {
        key = key * (m + 3) + std::clamp(long(h(a) * m), 0L, long(m));
      }
      return key;
    };
    std::unordered_map<long, std::vector<std::size_t>> buckets;
    for (std::size_t q = 0; q < grid_hat.size(); ++q) {
      buckets[bucket_key(grid_hat[q])].push_back(q);
    }
    std::vector<int> offset(s - 1);
    auto nearest = [&](const Point& khat, double& best_d) {
      std::size_t best = grid_hat.size();
      best_d = kInf;
      std::fill(offset.begin(), offset.end(), -1);
      while (true) {
        Point shifted = khat;
        for (int a = 0; a < s - 1; ++a) shifted(a) += double(offset[a]) / m;
        const auto it = buckets.find(bucket_key(shifted));
        if (it != buckets.end()) {
          for (std::size_t q : it->second) {
            const double d = (grid_hat[q] - khat).cwiseAbs().maxCoeff();
            if (d < best_d) {
              best_d = d;
              best = q;
            }
          }
        }
        int a = 0;
        while (a < s - 1 && ++offset[a] > 1) offset[a++] = -1;
        if (a == s - 1) break;
      }
      return best;
    };

    // Winding vectors by increasing |k|_1, so a truncated scan drops the
    // largest windings.
    std::vector<long> wind(s);
    std::function<bool(int, long)> compose = [&](int pos, long left) {
      if (pos == s - 1) {
        if (left < 1 || left > kmax[pos]) return true;
        wind[pos] = left;
        return candidate(support, wind, grid_w, grid_hat, m, nearest);
      }
      for (long v = 1; v <= std::min(kmax[pos], left - (s - 1 - pos)); ++v) {
        wind[pos] = v;
        if (!compose(pos + 1, left - v)) return false;
      }
      return true;
    };
    for (long total = s; total <= kmax_total; ++total) {
      if (!compose(0, total)) return;
    }
  }

  template <class Nearest>
  bool candidate(const std::vector<int>& support, const std::vector<long>& wind,
                 const std::vector<Point>& grid_w,
                 const std::vector<Point>& grid_hat, int m, Nearest& nearest) {
    const int s = static_cast<int>(support.size());
    if (!spend()) return false;
    long norm = 0;
    for (long v : wind) norm += v;
    Point khat(s);
    for (int a = 0; a < s; ++a) khat(a) = double(wind[a]) / norm;
    double best_d = kInf;
    const std::size_t best = nearest(khat, best_d);
    if (best == grid_hat.size()) return true;
    // Newton only where the target direction is within reach of the grid:
    // compare with the spread of gradient directions next to the best grid
    // point.
    double reach = 0.0;
    const Point& w0 = grid_w[best];
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        if (a == b || w0(a) <= 1.0 / m) continue;
        Point w1 = w0;
        w1(a) -= 1.0 / m;
        w1(b) += 1.0 / m;
        const Point g = f_.gradient(face_point(n_, support, w1));
        double total = 0.0;
        for (int c = 0; c < s; ++c) total += g(support[c]);
        double d = 0.0;
        for (int c = 0; c < s; ++c) {
          d = std::max(d, std::abs(g(support[c]) / total - grid_hat[best](c)));
        }
        reach = std::max(reach, d);
      }
    }
    if (best_d > 1.5 * reach) return true;
    Point w = grid_w[best];
    if (!newton(support, khat, w)) return true;
    const Point u = face_point(n_, support, w);
    for (const auto& r : out_.records) {
      if (r.support == support &&
          (r.moment_point - f_.radius(u) * u).norm() < 1e-9 &&
          std::abs(r.rotation(support[0]) - double(wind[0])) < 0.5) {
        return true;
      }
    }
    record(support, u, wind, true);
    return true;
  }

  const MomentRegion& region_;
  CanonicalFunction f_;
  int n_;
  double t_max_;
  OrbitOptions opts_;
  OrbitEnumeration out_;
  long used_ = 0;
};

}  // namespace

OrbitEnumeration enumerate_orbits(const MomentRegion& region, double t_max,
                                  const OrbitOptions& opts) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "T_max must be > 0");
  const MonotonicityResult mono = is_strictly_monotone(region, 2000);
  if (!mono.monotone) {
    throw Error(ErrorCode::InvalidArgument,
                "orbit enumeration needs a strictly monotone region");
  }
  OrbitEnumeration out = Enumerator(region, t_max, opts).run();
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const OrbitRecord& a, const OrbitRecord& b) {
                     if (a.support != b.support) return a.support < b.support;
                     return a.period < b.period;
                   });
  return out;
}

IndexResult lcz_toric_orbit(const OrbitRecord& record,
                            const MomentRegion& region, OrbitFrame frame) {
  const int n = region.dim();
  if (record.rotation.size() != n || record.moment_point.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "orbit record has wrong dimension");
  }
  std::vector<BlockIndex> blocks;
  std::vector<bool> in_support(n, false);
  for (int j : record.support) in_support[j] = true;
  bool shear_free = region.is_linear();
  if (!shear_free) {
    const PointMatrix h = CanonicalFunction(region).hessian(record.moment_point);
    double worst = 0.0;
    for (int a : record.support)
      for (int b : record.support) worst = std::max(worst, std::abs(h(a, b)));
    shear_free = worst < 1e-10;
  }
  for (int j : record.support) {
    blocks.push_back(Loop{std::lround(record.rotation(j))});
    if (shear_free) blocks.push_back(U1Rotation{0.0});
  }
  if (!shear_free) {
    blocks.push_back(UnipotentZeroRho{static_cast<int>(record.support.size())});
  }
  for (int j = 0; j < n; ++j) {
    if (!in_support[j]) blocks.push_back(U1Rotation{record.rotation(j)});
  }
  IndexResult r = lcz_block_sum(blocks);
  if (frame == OrbitFrame::Reeb) {
    r.exact_part += 1;
    r.value += 1;
  }
  return r;
}

}  // namespace ruelle
