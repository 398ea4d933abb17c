#include "ricci/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>

#include "ricci/errors.hpp"
#include "ricci/parallel.hpp"
#include "ricci/quadrature.hpp"

namespace ricci::profiles {

namespace {

double horner(const std::vector<double>& c, double x, int order) {
  const int n = static_cast<int>(c.size());
  double acc = 0.0;
  switch (order) {
    case 0:
      for (int k = n - 1; k >= 0; --k) acc = acc * x + c[static_cast<std::size_t>(k)];
      return acc;
    case 1:
      for (int k = n - 1; k >= 1; --k) acc = acc * x + k * c[static_cast<std::size_t>(k)];
      return acc;
    default:
      for (int k = n - 1; k >= 2; --k)
        acc = acc * x + static_cast<double>(k) * (k - 1) * c[static_cast<std::size_t>(k)];
      return acc;
  }
}

double table_eval(const ProfilePiece& pc, double r, int order) {
  const int n = static_cast<int>(pc.values.size());
  if (n < 4) throw ParameterError("table piece needs at least 4 values");
  const double h = pc.spacing;
  const double u = (r - pc.start) / h;
  if (order == 0) {
    int j = static_cast<int>(std::floor(u));
    j = std::clamp(j, 1, n - 3);
    const double t = u - j;
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    const auto& v = pc.values;
    return pc.a0 + pc.a1 * (r - pc.start) +
           wm * v[static_cast<std::size_t>(j - 1)] + w0 * v[static_cast<std::size_t>(j)] +
           w1 * v[static_cast<std::size_t>(j + 1)] + w2 * v[static_cast<std::size_t>(j + 2)];
  }
  int i = static_cast<int>(std::floor(u + 0.5));
  i = std::clamp(i, 1, n - 2);
  const double vm = pc.values[static_cast<std::size_t>(i - 1)];
  const double v0 = pc.values[static_cast<std::size_t>(i)];
  const double vp = pc.values[static_cast<std::size_t>(i + 1)];
  if (order == 1) return pc.a1 + (vp - vm) / (2.0 * h);
  return (vp - 2.0 * v0 + vm) / (h * h);
}

}  // namespace

double ProfilePiece::eval(double r, int order) const {
  if (order < 0 || order > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  switch (kind) {
    case PieceKind::Affine:
      if (order == 0) return a0 + a1 * r;
      return order == 1 ? a1 : 0.0;
    case PieceKind::Sinusoid: {
      const double arg = freq * r + phase;
      if (order == 0) return amp * std::sin(arg) + offset;
      if (order == 1) return amp * freq * std::cos(arg);
      return -amp * freq * freq * std::sin(arg);
    }
    case PieceKind::Polynomial:
      return horner(coeffs, r - center, order);
    case PieceKind::Table:
      return table_eval(*this, r, order);
  }
  throw ParameterError("unknown piece kind");
}

ProfilePiece ProfilePiece::affine(double lo, double hi, double a0, double a1) {
  ProfilePiece pc;
  pc.kind = PieceKind::Affine;
  pc.lo = lo;
  pc.hi = hi;
  pc.a0 = a0;
  pc.a1 = a1;
  return pc;
}

ProfilePiece ProfilePiece::sinusoid(double lo, double hi, double amp, double freq,
                                    double phase, double offset) {
  ProfilePiece pc;
  pc.kind = PieceKind::Sinusoid;
  pc.lo = lo;
  pc.hi = hi;
  pc.amp = amp;
  pc.freq = freq;
  pc.phase = phase;
  pc.offset = offset;
  return pc;
}

ProfilePiece ProfilePiece::polynomial(double lo, double hi, double center,
                                      std::vector<double> coeffs) {
  ProfilePiece pc;
  pc.kind = PieceKind::Polynomial;
  pc.lo = lo;
  pc.hi = hi;
  pc.center = center;
  pc.coeffs = std::move(coeffs);
  return pc;
}

ProfilePiece ProfilePiece::table(double lo, double hi, double start, double spacing,
                                 std::vector<double> values) {
  ProfilePiece pc;
  pc.kind = PieceKind::Table;
  pc.lo = lo;
  pc.hi = hi;
  pc.start = start;
  pc.spacing = spacing;
  pc.values = std::move(values);
  return pc;
}

ScalarProfile::ScalarProfile(std::vector<ProfilePiece> pieces, std::string name)
    : pieces_(std::move(pieces)), name_(std::move(name)) {
  if (pieces_.empty()) throw ParameterError("profile needs at least one piece");
  for (const auto& pc : pieces_)
    if (!(pc.hi > pc.lo)) throw ParameterError("piece interval must have positive length");
  const double scale =
      std::max({1.0, std::abs(pieces_.front().lo), std::abs(pieces_.back().hi)});
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (std::abs(pieces_[i].lo - pieces_[i - 1].hi) > 1e-12 * scale)
      throw ParameterError("profile pieces are not contiguous");
    pieces_[i].lo = pieces_[i - 1].hi;
    const double vl = pieces_[i - 1].eval(pieces_[i - 1].hi, 0);
    const double vr = pieces_[i].eval(pieces_[i].lo, 0);
    if (std::abs(vl - vr) > 1e-12 * std::max(1.0, std::abs(vl)))
      throw ParameterError("profile pieces do not agree at a breakpoint");
  }
}

double ScalarProfile::lo() const {
  if (pieces_.empty()) throw DomainError("empty profile");
  return pieces_.front().lo;
}

double ScalarProfile::hi() const {
  if (pieces_.empty()) throw DomainError("empty profile");
  return pieces_.back().hi;
}

std::vector<double> ScalarProfile::breakpoints() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) out.push_back(pieces_[i].hi);
  return out;
}

std::size_t ScalarProfile::find_piece(double r) const {
  auto it = std::lower_bound(
      pieces_.begin(), pieces_.end(), r,
      [](const ProfilePiece& pc, double x) { return pc.hi < x; });
  if (it == pieces_.end()) --it;
  return static_cast<std::size_t>(it - pieces_.begin());
}

double ScalarProfile::eval(double r, int order) const {
  if (pieces_.empty()) throw DomainError("empty profile");
  if (order < 0 || order > 2) throw ParameterError("derivative order must be 0, 1 or 2");
  const double a = lo(), b = hi();
  const double slack = 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  if (r < a - slack || r > b + slack)
    throw DomainError("argument " + std::to_string(r) + " outside profile domain [" +
                      std::to_string(a) + ", " + std::to_string(b) + "]");
  const double rc = std::clamp(r, a, b);
  return pieces_[find_piece(rc)].eval(rc, order);
}

nlohmann::json ScalarProfile::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["breakpoints"] = breakpoints();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pc : pieces_) {
    nlohmann::json pj;
    pj["interval"] = {pc.lo, pc.hi};
    switch (pc.kind) {
      case PieceKind::Affine:
        pj["kind"] = "affine";
        pj["a0"] = pc.a0;
        pj["a1"] = pc.a1;
        break;
      case PieceKind::Sinusoid:
        pj["kind"] = "sinusoid";
        pj["amp"] = pc.amp;
        pj["freq"] = pc.freq;
        pj["phase"] = pc.phase;
        pj["offset"] = pc.offset;
        break;
      case PieceKind::Polynomial:
        pj["kind"] = "polynomial";
        pj["center"] = pc.center;
        pj["coeffs"] = pc.coeffs;
        break;
      case PieceKind::Table:
        pj["kind"] = "table";
        pj["start"] = pc.start;
        pj["spacing"] = pc.spacing;
        if (pc.a0 != 0.0 || pc.a1 != 0.0) pj["trend"] = {pc.a0, pc.a1};
        pj["values"] = pc.values;
        break;
    }
    arr.push_back(std::move(pj));
  }
  j["pieces"] = std::move(arr);
  return j;
}

ScalarProfile ScalarProfile::from_json(const nlohmann::json& j) {
  std::vector<ProfilePiece> pieces;
  for (const auto& pj : j.at("pieces")) {
    const double lo = pj.at("interval").at(0).get<double>();
    const double hi = pj.at("interval").at(1).get<double>();
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "affine") {
      pieces.push_back(ProfilePiece::affine(lo, hi, pj.at("a0").get<double>(),
                                            pj.at("a1").get<double>()));
    } else if (kind == "sinusoid") {
      pieces.push_back(ProfilePiece::sinusoid(
          lo, hi, pj.at("amp").get<double>(), pj.at("freq").get<double>(),
          pj.at("phase").get<double>(), pj.at("offset").get<double>()));
    } else if (kind == "polynomial") {
      pieces.push_back(ProfilePiece::polynomial(
          lo, hi, pj.at("center").get<double>(),
          pj.at("coeffs").get<std::vector<double>>()));
    } else if (kind == "table") {
      ProfilePiece pc = ProfilePiece::table(
          lo, hi, pj.at("start").get<double>(), pj.at("spacing").get<double>(),
          pj.at("values").get<std::vector<double>>());
      if (pj.contains("trend")) {
        pc.a0 = pj.at("trend").at(0).get<double>();
        pc.a1 = pj.at("trend").at(1).get<double>();
      }
      pieces.push_back(std::move(pc));
    } else {
      throw ParameterError("unknown piece kind '" + kind + "'");
    }
  }
  return ScalarProfile(std::move(pieces), j.value("name", std::string{}));
}

void ScalarProfile::write_grid_csv(std::ostream& os, double step) const {
  os << "r,value,d1,d2\n";
  const auto old = os.precision(17);
  GridSpec grid{lo(), hi(), step, {}};
  for (double x : grid.nodes())
    os << x << ',' << eval(x, 0) << ',' << eval(x, 1) << ',' << eval(x, 2) << '\n';
  os.precision(old);
}

ScalarProfile make_affine(double lo, double hi, double a0, double a1, std::string name) {
  return ScalarProfile({ProfilePiece::affine(lo, hi, a0, a1)}, std::move(name));
}

ScalarProfile make_sinusoid(double lo, double hi, double amp, double freq, double phase,
                            double offset, std::string name) {
  return ScalarProfile({ProfilePiece::sinusoid(lo, hi, amp, freq, phase, offset)},
                       std::move(name));
}

ScalarProfile affine_change(const ScalarProfile& p, double scale, double shift,
                            std::string name) {
  if (!(scale > 0)) throw ParameterError("affine_change needs a positive scale");
  std::vector<ProfilePiece> out;
  for (ProfilePiece pc : p.pieces()) {
    pc.lo = scale * pc.lo + shift;
    pc.hi = scale * pc.hi + shift;
    switch (pc.kind) {
      case PieceKind::Affine:
        pc.a0 = scale * pc.a0 - pc.a1 * shift;
        break;
      case PieceKind::Sinusoid:
        pc.phase = pc.phase - pc.freq * shift / scale;
        pc.freq = pc.freq / scale;
        pc.amp = scale * pc.amp;
        pc.offset = scale * pc.offset;
        break;
      case PieceKind::Polynomial: {
        pc.center = scale * pc.center + shift;
        double f = scale;
        for (auto& c : pc.coeffs) {
          c *= f;
          f /= scale;
        }
        break;
      }
      case PieceKind::Table:
        pc.start = scale * pc.start + shift;
        pc.spacing = scale * pc.spacing;
        pc.a0 = scale * pc.a0;  // trend slope a1 is invariant: values and
                                // abscissae stretch by the same factor
        for (auto& v : pc.values) v *= scale;
        break;
    }
    out.push_back(std::move(pc));
  }
  return ScalarProfile(std::move(out),
                       name.empty() ? p.name() : std::move(name));
}

ScalarProfile mirror_about(const ScalarProfile& p, double axis, std::string name) {
  std::vector<ProfilePiece> out;
  const auto& src = p.pieces();
  for (auto it = src.rbegin(); it != src.rend(); ++it) {
    ProfilePiece pc = *it;
    const double nlo = axis - pc.hi, nhi = axis - pc.lo;
    pc.lo = nlo;
    pc.hi = nhi;
    switch (pc.kind) {
      case PieceKind::Affine:
        pc.a0 = pc.a0 + pc.a1 * axis;
        pc.a1 = -pc.a1;
        break;
      case PieceKind::Sinusoid:
        pc.phase = -(pc.freq * axis + pc.phase);
        pc.amp = -pc.amp;
        break;
      case PieceKind::Polynomial: {
        pc.center = axis - pc.center;
        for (std::size_t k = 1; k < pc.coeffs.size(); k += 2) pc.coeffs[k] = -pc.coeffs[k];
        break;
      }
      case PieceKind::Table: {
        const double n = static_cast<double>(pc.values.size()) - 1.0;
        pc.start = axis - (pc.start + n * pc.spacing);
        pc.a0 = pc.a0 + pc.a1 * n * pc.spacing;
        pc.a1 = -pc.a1;
        std::reverse(pc.values.begin(), pc.values.end());
        break;
      }
    }
    out.push_back(std::move(pc));
  }
  return ScalarProfile(std::move(out),
                       name.empty() ? p.name() : std::move(name));
}

ScalarProfile restrict_to(const ScalarProfile& p, double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("restrict_to needs hi > lo");
  const double slack = 1e-9 * std::max({1.0, std::abs(p.lo()), std::abs(p.hi())});
  if (lo < p.lo() - slack || hi > p.hi() + slack)
    throw ParameterError("restriction interval exceeds profile domain");
  std::vector<ProfilePiece> out;
  for (ProfilePiece pc : p.pieces()) {
    const double a = std::max(pc.lo, lo), b = std::min(pc.hi, hi);
    if (b - a > slack) {
      pc.lo = a;
      pc.hi = b;
      out.push_back(std::move(pc));
    }
  }
  if (out.empty()) throw ParameterError("restriction interval misses every piece");
  return ScalarProfile(std::move(out), p.name());
}

MollifierKernel::MollifierKernel(double radius) : radius_(radius), scale_(1.0) {
  if (!(radius > 0)) throw ParameterError("mollifier radius must be positive");
  auto raw = [radius](double s) {
    const double u = s / radius;
    const double w = 1.0 - u * u;
    if (w < 1e-14) return 0.0;
    return std::exp(-1.0 / w);
  };
  scale_ = 1.0 / (2.0 * integrate(raw, 0.0, radius_, 1e-14));
}

double MollifierKernel::operator()(double s) const {
  const double u = s / radius_;
  const double w = 1.0 - u * u;
  if (w < 1e-14) return 0.0;
  return scale_ * std::exp(-1.0 / w);
}

double MollifierKernel::integral() const {
  return 2.0 * integrate([this](double s) { return (*this)(s); }, 0.0, radius_, 1e-13);
}

namespace {

// Evaluates p with the boundary pieces extended past the domain ends, so a
// convolution window may poke slightly outside [p.lo, p.hi].
double eval_extended(const ScalarProfile& p, double x) {
  if (x < p.lo()) return p.pieces().front().eval(x, 0);
  if (x > p.hi()) return p.pieces().back().eval(x, 0);
  return p.eval(x, 0);
}

double convolve_at(const ScalarProfile& p, const MollifierKernel& k, double x) {
  std::vector<double> splits;
  for (double b : p.breakpoints()) {
    const double d = std::abs(x - b);
    if (d > 0 && d < k.radius()) splits.push_back(d);
  }
  auto f = [&](double s) {
    return k(s) * (eval_extended(p, x - s) + eval_extended(p, x + s));
  };
  return integrate_split(f, 0.0, k.radius(), splits, 1e-13);
}

// Convolution of p minus the line t0 + t1 * (y - tref), using fixed
// Gauss-Legendre panels between the kink offsets |x - b|. Those offsets move
// linearly with x and the panel layout is a fixed function of them, so the
// quadrature error varies smoothly from one table node to the next instead of
// jittering the way adaptive subdivision does; smooth errors drop out of the
// second differences a table evaluation takes. The kernel integrates to one,
// so subtracting the line from the integrand subtracts line(x) from the
// result and the deviation values stay small enough that their own rounding
// is harmless.
double convolve_deviation(const ScalarProfile& p, const MollifierKernel& k,
                          double x, double t0, double t1, double tref) {
  std::vector<double> cuts{0.0, k.radius()};
  for (double b : p.breakpoints()) {
    const double d = std::abs(x - b);
    if (d < k.radius()) cuts.push_back(d);
  }
  std::sort(cuts.begin(), cuts.end());
  auto g = [&](double y) {
    return eval_extended(p, y) - (t0 + t1 * (y - tref));
  };
  auto f = [&](double s) { return k(s) * (g(x - s) + g(x + s)); };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) acc += integrate_gl(f, cuts[i], cuts[i + 1], 8);
  return acc;
}

}  // namespace

ScalarProfile mollify(const ScalarProfile& p, const MollifierKernel& kernel,
                      double spacing) {
  const double R = kernel.radius();
  const double out_lo = p.lo() + R, out_hi = p.hi() - R;
  if (!(out_hi > out_lo))
    throw ParameterError("mollifier radius too large for the profile domain");
  const double tol = 1e-12 * std::max(1.0, std::abs(out_hi));

  // Segments where the convolution reproduces an affine piece exactly.
  struct Seg {
    double lo, hi;
    const ProfilePiece* src;
  };
  std::vector<Seg> exact;
  for (const auto& pc : p.pieces()) {
    if (pc.kind != PieceKind::Affine) continue;
    const double a = std::max(out_lo, pc.lo + R), b = std::min(out_hi, pc.hi - R);
    if (b > a + tol) exact.push_back({a, b, &pc});
  }

  struct Window {
    double lo, hi;
    const ProfilePiece* left;   // adjacent exact piece, if any
    const ProfilePiece* right;
  };
  std::vector<Window> windows;
  double cur = out_lo;
  const ProfilePiece* prev = nullptr;
  for (const auto& seg : exact) {
    if (seg.lo > cur + tol) windows.push_back({cur, seg.lo, prev, seg.src});
    cur = seg.hi;
    prev = seg.src;
  }
  if (out_hi > cur + tol) windows.push_back({cur, out_hi, prev, nullptr});

  std::vector<ProfilePiece> out;
  std::size_t seg_idx = 0, win_idx = 0;
  while (seg_idx < exact.size() || win_idx < windows.size()) {
    const bool take_seg =
        win_idx >= windows.size() ||
        (seg_idx < exact.size() && exact[seg_idx].lo < windows[win_idx].lo);
    if (take_seg) {
      const auto& seg = exact[seg_idx++];
      out.push_back(ProfilePiece::affine(seg.lo, seg.hi, seg.src->a0, seg.src->a1));
      continue;
    }
    const auto& win = windows[win_idx++];
    const double len = win.hi - win.lo;
    double h = spacing > 0 ? spacing : len / 1000.0;
    const int nseg = std::max(4, static_cast<int>(std::ceil(len / h - 1e-9)));
    h = len / nseg;
    const int nvals = nseg + 5;
    const double start = win.lo - 2.0 * h;
    // Secant of the convolution across the window, carried by the piece as an
    // exact affine trend; the table stores only the deviation from it.
    const double vlo =
        win.left ? win.left->eval(win.lo, 0) : convolve_at(p, kernel, win.lo);
    const double vhi =
        win.right ? win.right->eval(win.hi, 0) : convolve_at(p, kernel, win.hi);
    const double t1 = (vhi - vlo) / len;
    std::vector<double> values(static_cast<std::size_t>(nvals));
    parallel_for(static_cast<std::size_t>(nvals), [&](std::size_t i) {
      values[i] = convolve_deviation(p, kernel, start + static_cast<double>(i) * h,
                                     vlo, t1, win.lo);
    });
    // Pin the window ends to the secant exactly (the correction is an affine
    // ramp of size ~ the quadrature error, so curvature is untouched).
    const double dlo = -values[2], dhi = -values[static_cast<std::size_t>(nvals - 3)];
    for (int i = 0; i < nvals; ++i) {
      const double t = (start + i * h - win.lo) / len;
      values[static_cast<std::size_t>(i)] += (1.0 - t) * dlo + t * dhi;
    }
    ProfilePiece pc = ProfilePiece::table(win.lo, win.hi, start, h, std::move(values));
    pc.a0 = vlo + t1 * (start - win.lo);
    pc.a1 = t1;
    out.push_back(std::move(pc));
  }
  return ScalarProfile(std::move(out), p.name());
}

namespace {

double eval_one_sided(const ScalarProfile& p, double r, int side, int order) {
  const auto& pcs = p.pieces();
  std::size_t idx = 0;
  if (side < 0) {
    while (idx + 1 < pcs.size() && pcs[idx].hi < r) ++idx;
  } else {
    idx = pcs.size() - 1;
    while (idx > 0 && pcs[idx].lo > r) --idx;
  }
  return pcs[idx].eval(r, order);
}

}  // namespace

ScalarProfile concave_smooth(const ScalarProfile& p, double corner, double halfwidth) {
  if (!(halfwidth > 0)) throw ParameterError("concave_smooth needs a positive halfwidth");
  const double x0 = corner - halfwidth, x1 = corner + halfwidth;
  const double slack = 1e-9 * std::max({1.0, std::abs(p.lo()), std::abs(p.hi())});
  if (x0 < p.lo() - slack || x1 > p.hi() + slack)
    throw ParameterError("smoothing window exceeds profile domain");

  bool at_break = false;
  for (double b : p.breakpoints())
    if (std::abs(b - corner) <= 1e-12 * std::max(1.0, std::abs(corner))) at_break = true;
  if (!at_break) return p;

  const double dl = eval_one_sided(p, corner, -1, 1);
  const double dr = eval_one_sided(p, corner, +1, 1);
  if (std::abs(dr - dl) <= 1e-10) return p;
  if (dr > dl) throw ParameterError("corner is convex; only concave corners are smoothed");

  const double delta = 2.0 * halfwidth;
  const double v0 = eval_one_sided(p, x0, -1, 0);
  const double d10 = eval_one_sided(p, x0, -1, 1);
  const double d20 = eval_one_sided(p, x0, -1, 2);
  const double v1 = eval_one_sided(p, x1, +1, 0);
  const double d11 = eval_one_sided(p, x1, +1, 1);
  const double d21 = eval_one_sided(p, x1, +1, 2);
  const double e10 = d10 * delta, e20 = d20 * delta * delta;
  const double e11 = d11 * delta, e21 = d21 * delta * delta;

  // Quintic Hermite in t = (x - x0) / delta, built through its second
  // derivative in Bernstein form M(t) = b0 (1-t)^3 + 3 b1 t (1-t)^2 +
  // 3 b2 t^2 (1-t) + b3 t^3. The endpoint curvatures enter as b0 and b3
  // directly, so they are matched exactly even when the window is tiny and
  // the expanded monomial coefficients would cancel catastrophically; b1 and
  // b2 come from integral(M) = e11 - e10 and integral((1-t) M) = v1 - v0 - e10.
  const double b0 = e20, b3 = e21;
  const double sum_p = 4.0 * (e11 - e10) - b0 - b3;
  const double sum_q = 20.0 * (v1 - v0 - e10) - 4.0 * b0 - b3;
  const double b1 = sum_q - 2.0 * sum_p;
  const double b2 = 3.0 * sum_p - sum_q;
  const double m0 = b0;
  const double m1 = 3.0 * (b1 - b0);
  const double m2 = 3.0 * (b0 - 2.0 * b1 + b2);
  const double m3 = -b0 + 3.0 * (b1 - b2) + b3;
  std::vector<double> ct(6);
  ct[0] = v0;
  ct[1] = e10;
  ct[2] = m0 / 2.0;
  ct[3] = m1 / 6.0;
  ct[4] = m2 / 12.0;
  ct[5] = m3 / 20.0;
  std::vector<double> coeffs(6);
  double f = 1.0;
  for (int k = 0; k < 6; ++k) {
    coeffs[static_cast<std::size_t>(k)] = ct[static_cast<std::size_t>(k)] / f;
    f *= delta;
  }
  ProfilePiece quintic = ProfilePiece::polynomial(x0, x1, x0, coeffs);

  const double vscale = std::max(1.0, std::abs(v0));
  const double slope_lo = std::min(d10, d11) - 1e-9;
  const double slope_hi = std::max(d10, d11) + 1e-9;
  for (int i = 0; i <= 2000; ++i) {
    const double x = x0 + delta * static_cast<double>(i) / 2000.0;
    if (quintic.eval(x, 2) > 1e-10 * vscale)
      throw NumericError("smoothed corner failed the concavity check");
    const double s = quintic.eval(x, 1);
    if (s < slope_lo || s > slope_hi)
      throw NumericError("smoothed corner failed the slope bound check");
    if (quintic.eval(x, 0) > p.eval(x, 0) + 1e-10 * vscale)
      throw NumericError("smoothed corner exceeds the input profile");
  }

  const double tol = 1e-12 * std::max(1.0, std::abs(p.hi()));
  std::vector<ProfilePiece> out;
  for (ProfilePiece pc : p.pieces()) {
    if (pc.hi <= x0 + tol) {
      out.push_back(std::move(pc));
    } else if (pc.lo < x0 - tol) {
      pc.hi = x0;
      out.push_back(std::move(pc));
    }
  }
  out.push_back(std::move(quintic));
  for (ProfilePiece pc : p.pieces()) {
    if (pc.lo >= x1 - tol) {
      out.push_back(std::move(pc));
    } else if (pc.hi > x1 + tol) {
      pc.lo = x1;
      out.push_back(std::move(pc));
    }
  }
  return ScalarProfile(std::move(out), p.name());
}

RegularityReport check_regularity(const ScalarProfile& p, const GridSpec& grid) {
  RegularityReport rep;
  const auto nodes = grid.nodes();
  if (nodes.size() < 2) throw ParameterError("regularity grid needs at least 2 nodes");
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = p.eval(nodes[i], 0);

  rep.min_value = *std::min_element(vals.begin(), vals.end());
  rep.lipschitz_constant = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double dx = nodes[i + 1] - nodes[i];
    if (dx > 0)
      rep.lipschitz_constant =
          std::max(rep.lipschitz_constant, std::abs(vals[i + 1] - vals[i]) / dx);
  }

  rep.concave = true;
  const double s = grid.step;
  for (double x : nodes) {
    if (x - s < p.lo() || x + s > p.hi()) continue;
    const double d2raw = p.eval(x - s, 0) - 2.0 * p.eval(x, 0) + p.eval(x + s, 0);
    if (d2raw > 1e-10) {
      rep.concave = false;
      break;
    }
  }

  for (double b : p.breakpoints()) {
    RegularityReport::Jump j;
    j.r = b;
    j.value = std::abs(eval_one_sided(p, b, +1, 0) - eval_one_sided(p, b, -1, 0));
    j.d1 = std::abs(eval_one_sided(p, b, +1, 1) - eval_one_sided(p, b, -1, 1));
    j.d2 = std::abs(eval_one_sided(p, b, +1, 2) - eval_one_sided(p, b, -1, 2));
    rep.breakpoint_jumps.push_back(j);
  }
  return rep;
}

}  // namespace ricci::profiles
