#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ricci/errors.hpp"
#include "ricci/grid.hpp"
#include "ricci/parallel.hpp"
#include "ricci/quadrature.hpp"

namespace ricci {

namespace {
std::atomic<int> g_max_threads{0};

int resolved_threads() {
  int cap = g_max_threads.load();
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (cap <= 0) return std::min(hw, 16);
  return std::min(cap, hw);
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n); }
int max_threads() { return resolved_threads(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int nt = resolved_threads();
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t chunk = std::max<std::size_t>(1, n / (8 * nt));
  auto worker = [&] {
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      std::size_t end = std::min(n, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

std::vector<double> GridSpec::nodes() const {
  if (!(hi > lo) || !(step > 0)) throw ParameterError("GridSpec: need hi > lo and step > 0");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>((hi - lo) / step + 1e-9);
  out.reserve(count + 1 + extra.size());
  for (std::size_t i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  for (double x : extra)
    if (x >= lo && x <= hi) out.push_back(x);
  std::sort(out.begin(), out.end());
  const double tol = step * 1e-6;
  out.erase(std::unique(out.begin(), out.end(),
                        [tol](double a, double b) { return std::abs(a - b) < tol; }),
            out.end());
  return out;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b,
                double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(a, b, fa, fm, fb);
  return adaptive(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& interior, double tol) {
  std::vector<double> pts{a};
  for (double x : interior)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double sum = 0.0;
  const double per = tol / static_cast<double>(pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] > pts[i]) sum += integrate(f, pts[i], pts[i + 1], per);
  return sum;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels) {
  // 20-point Gauss-Legendre nodes and weights on (-1, 1).
  static const double xs[10] = {
      0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
      0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
      0.9639719272779138, 0.9931285991850949};
  static const double ws[10] = {
      0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
      0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
      0.0406014298003869, 0.0176140071391521};
  if (panels < 1) panels = 1;
  double sum = 0.0;
  const double hstep = (b - a) / panels;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double c = a + (pnl + 0.5) * hstep;
    const double h2 = 0.5 * hstep;
    double acc = 0.0;
    for (int i = 0; i < 10; ++i)
      acc += ws[i] * (f(c - h2 * xs[i]) + f(c + h2 * xs[i]));
    sum += acc * h2;
  }
  return sum;
}

}  // namespace ricci
