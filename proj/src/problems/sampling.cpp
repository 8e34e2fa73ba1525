#include "apinn/problems/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "apinn/errors.hpp"

namespace apinn::problems {
namespace {

// Independent streams for the regions of one point set.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), 0x5a17u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Uniform on the open interval (lo, hi).
double open_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double v = lo + (hi - lo) * u(rng);
    if (v > lo && v < hi) return v;
  }
}

struct Clipped {
  Segment seg;
  double lo, hi;
};

std::vector<Clipped> clip_segments(const Problem& p, const Box& box) {
  std::vector<Clipped> out;
  const double tol = 1e-12;
  for (const Segment& s : p.segments()) {
    const int fa = s.fixed_axis;
    if (s.value < box.lo[fa] - tol || s.value > box.hi[fa] + tol) continue;
    const int free = 1 - fa;
    out.push_back({s, box.lo[free], box.hi[free]});
  }
  return out;
}

RegionPoints make_region(const Problem& p, const Box& box, const Budget& b,
                         const SampleOptions& opt, std::uint64_t tag) {
  RegionPoints r;
  r.box = box;
  r.boundary = sample_boundary(p, box, b.boundary, stream_seed(opt.seed, 2 * tag));
  const int nres = std::max(1, b.residual / std::max(1, opt.residual_divisor));
  r.residual = sample_interior(box, nres, opt.sampler, stream_seed(opt.seed, 2 * tag + 1));
  r.forcing = p.forcing_at(r.residual);
  return r;
}

}  // namespace

std::vector<int> split_budget(int total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(weights.size(), 0);
  if (weights.empty() || total <= 0) return out;
  if (!(sum > 0)) throw ConfigError("split_budget: weights must have positive sum");
  std::vector<double> rem(weights.size());
  int used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = total * weights[i] / sum;
    out[i] = static_cast<int>(std::floor(share));
    rem[i] = share - out[i];
    used += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[order[k % order.size()]];
  return out;
}

BoundaryPoints sample_boundary(const Problem& p, const Box& box, int count, std::uint64_t seed) {
  BoundaryPoints bp;
  const int nu = p.unknowns();
  bp.dirichlet_vals.resize(nu, 0);
  bp.neumann_vals.resize(nu, 0);
  std::vector<Clipped> segs = clip_segments(p, box);
  if (!p.has_reference()) {
    std::erase_if(segs, [](const Clipped& c) { return c.seg.kind == Condition::Dirichlet; });
  }
  if (segs.empty() || count <= 0) return bp;
  std::vector<double> w;
  for (const auto& c : segs) w.push_back(c.hi - c.lo);
  const std::vector<int> n = split_budget(count, w);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::array<double, 2>> dpts, npts;
  std::vector<std::array<double, kMaxUnknowns>> dvals, nvals;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Clipped& c = segs[s];
    for (int i = 0; i < n[s]; ++i) {
      std::array<double, 2> x{};
      x[c.seg.fixed_axis] = c.seg.value;
      x[1 - c.seg.fixed_axis] = c.lo + (c.hi - c.lo) * u(rng);
      std::array<double, kMaxUnknowns> g{};
      p.boundary_value(c.seg, x[0], x[1], g.data());
      if (c.seg.kind == Condition::Dirichlet) {
        dpts.push_back(x);
        dvals.push_back(g);
      } else {
        npts.push_back(x);
        nvals.push_back(g);
      }
    }
  }
  auto fill = [nu](const auto& pts, const auto& vals, RowMat& P, RowMat& V) {
    P.resize(2, static_cast<Index>(pts.size()));
    V.resize(nu, static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      P(0, i) = pts[i][0];
      P(1, i) = pts[i][1];
      for (int k = 0; k < nu; ++k) V(k, i) = vals[i][k];
    }
  };
  fill(dpts, dvals, bp.dirichlet_pts, bp.dirichlet_vals);
  fill(npts, nvals, bp.neumann_pts, bp.neumann_vals);
  return bp;
}

RowMat sample_interior(const Box& box, int count, Sampler s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RowMat pts(2, count);
  if (s == Sampler::Uniform) {
    for (int i = 0; i < count; ++i) {
      pts(0, i) = open_uniform(rng, box.lo[0], box.hi[0]);
      pts(1, i) = open_uniform(rng, box.lo[1], box.hi[1]);
    }
    return pts;
  }
  // One point per stratum on each axis, strata permuted independently.
  for (int a = 0; a < 2; ++a) {
    std::vector<int> perm(count);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const double h = box.width(a) / count;
    for (int i = 0; i < count; ++i) {
      const double lo = box.lo[a] + h * perm[i];
      pts(a, i) = open_uniform(rng, lo, lo + h);
    }
  }
  return pts;
}

PointSet sample_global(const Problem& p, const SampleOptions& opt) {
  PointSet ps;
  ps.seed = opt.seed;
  ps.regions.push_back(make_region(p, p.domain(), p.budget_global(), opt, 0));
  return ps;
}

PointSet sample_pieces(const Problem& p, int pieces, const SampleOptions& opt) {
  const Decomposition dec = p.decomposition(pieces);
  const Budget b = p.budget_piece(pieces);
  PointSet ps;
  ps.seed = opt.seed;
  for (int i = 0; i < dec.pieces(); ++i) {
    ps.regions.push_back(make_region(p, dec.slab(p.domain(), i), b, opt, 1 + i));
  }
  const Box dom = p.domain();
  const int free = 1 - dec.axis;
  for (std::size_t c = 0; c < dec.cuts.size(); ++c) {
    std::mt19937_64 rng(stream_seed(opt.seed, 1000 + c));
    InterfacePoints ip;
    ip.left = static_cast<int>(c);
    ip.pts.resize(2, b.interface);
    for (int k = 0; k < b.interface; ++k) {
      ip.pts(dec.axis, k) = dec.cuts[c];
      ip.pts(free, k) = open_uniform(rng, dom.lo[free], dom.hi[free]);
    }
    ip.forcing = p.forcing_at(ip.pts);
    ps.interfaces.push_back(std::move(ip));
  }
  return ps;
}

}  // namespace apinn::problems
