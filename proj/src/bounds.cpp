#include "nnpde/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nnpde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_or_ninf(double x) { return x > 0.0 ? std::log(x) : -kInf; }

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double sqrt_log_clamped(double x) { return std::sqrt(std::max(0.0, std::log(x))); }

}  // namespace

LogValue LogValue::from_log(double log) { return {log, std::exp(log)}; }

LogValue LogValue::from_value(double value) {
  if (value < 0.0) throw std::invalid_argument("log value of a negative number");
  return {log_or_ninf(value), value};
}

bool LogValue::finite() const { return std::isfinite(value); }

void NetClassSpec::validate() const {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (!(nL > 0.0)) throw std::invalid_argument("nL must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  if (!(f_inf >= 0.0) || !(g_inf >= 0.0)) throw std::invalid_argument("data bounds must be nonnegative");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
}

LipschitzConstants lipschitz_constants(const NetClassSpec& s) {
  s.validate();
  const double lnL = std::log(s.nL), lR = std::log(s.R), lL = std::log(double(s.L)), ld = std::log(double(s.d));
  // log(d L nL^{2(L-1)} R^{2L} + f) and log(nL R + g)
  const double inner_i = log_add(ld + lL + 2.0 * (s.L - 1) * lnL + 2.0 * s.L * lR, log_or_ninf(s.f_inf));
  const double inner_b = log_add(lnL + lR, log_or_ninf(s.g_inf));
  LipschitzConstants k;
  k.M_i = LogValue::from_log(2.0 * inner_i);
  k.M_b = LogValue::from_log(2.0 * inner_b);
  k.Lambda_i = LogValue::from_log(std::log(4.0) + ld + 2.0 * lL + std::log(s.eta) + 0.5 * lnL +
                                  (3.0 * s.L - 3.0) * (lnL + lR) + inner_i);
  k.Lambda_b = LogValue::from_log(std::log(2.0) + 0.5 * lnL + (s.L - 1.0) * (lnL + lR) + inner_b);
  return k;
}

RademacherBounds rademacher_bounds(const NetClassSpec& s, double n, double m) {
  s.validate();
  if (!(n >= 2.0) || !(m >= 2.0)) throw std::invalid_argument("sample counts must be at least 2");
  const double lnL = std::log(s.nL), lR = std::log(s.R), lc = std::log(s.c);
  const double sr = sqrt_log_clamped(s.R) + sqrt_log_clamped(s.nL);
  RademacherBounds b;
  b.interior = LogValue::from_log(lc - 0.5 * std::log(n) + (4.0 * s.L - 3.5) * lnL + 4.0 * s.L * lR +
                                  log_or_ninf(sr + sqrt_log_clamped(n)));
  b.boundary =
      LogValue::from_log(lc - 0.5 * std::log(m) + 2.0 * lR + 2.5 * lnL + log_or_ninf(sr + sqrt_log_clamped(m)));
  return b;
}

LogValue statistical_bound(const NetClassSpec& s, double n, double m, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  const RademacherBounds b = rademacher_bounds(s, n, m);
  return LogValue::from_log(log_add(b.interior.log, log_or_ninf(alpha) + b.boundary.log));
}

Prescription prescribe_for_tolerance(double eps, int d, double mu) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in (0, 1)");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  Prescription p;
  p.eps = eps;
  p.mu = mu;
  p.d = d;
  const double ld3 = std::log(d + 3.0);
  p.L = std::max(2, int(std::ceil(ld3)));
  p.nL_exponent = -d / (1.0 - mu);
  p.R_exponent = -(9.0 * d + 12.0) / (2.0 - 2.0 * mu);
  p.n_exponent = -4.0 - ((44.0 * d + 48.0) * ld3 - 7.0 * d) / (1.0 - mu);
  p.m_exponent = -4.0 - (23.0 * d + 24.0) / (1.0 - mu);
  const double le = std::log(eps);
  auto ceiled = [le](double exponent) {
    LogValue v = LogValue::from_log(exponent * le);
    if (v.finite()) v = LogValue::from_value(std::ceil(v.value));
    return v;
  };
  p.nL = ceiled(p.nL_exponent);
  p.R = ceiled(p.R_exponent);
  p.n = ceiled(p.n_exponent);
  p.m = ceiled(p.m_exponent);
  return p;
}

BoundReport make_report(const NetClassSpec& s, double n, double m, double alpha, const std::vector<double>& eps,
                        double mu) {
  BoundReport r;
  r.spec = s;
  r.n = n;
  r.m = m;
  r.alpha = alpha;
  r.lipschitz = lipschitz_constants(s);
  r.rademacher = rademacher_bounds(s, n, m);
  r.E_stat = statistical_bound(s, n, m, alpha);
  for (double e : eps) r.prescriptions.push_back(prescribe_for_tolerance(e, s.d, mu));
  return r;
}

BoundReport make_prescription_report(int d, const std::vector<double>& eps, double mu) {
  BoundReport r;
  r.has_class = false;
  r.spec.d = d;
  for (double e : eps) r.prescriptions.push_back(prescribe_for_tolerance(e, d, mu));
  return r;
}

namespace {

std::string number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct Line {
  std::string quantity;
  std::string eps;
  LogValue v;
  std::string exponent;
};

std::vector<Line> report_lines(const BoundReport& r) {
  std::vector<Line> out;
  if (r.has_class)
    out = {
        {"M_i", "", r.lipschitz.M_i, ""},
        {"M_b", "", r.lipschitz.M_b, ""},
        {"Lambda_i", "", r.lipschitz.Lambda_i, ""},
        {"Lambda_b", "", r.lipschitz.Lambda_b, ""},
        {"R_n_interior", "", r.rademacher.interior, ""},
        {"R_m_boundary", "", r.rademacher.boundary, ""},
        {"E_stat", "", r.E_stat, ""},
    };
  char buf[64];
  for (const Prescription& p : r.prescriptions) {
    std::snprintf(buf, sizeof buf, "%.6g", p.eps);
    out.push_back({"L", buf, LogValue::from_value(p.L), ""});
    out.push_back({"nL", buf, p.nL, number(p.nL_exponent)});
    out.push_back({"R", buf, p.R, number(p.R_exponent)});
    out.push_back({"n", buf, p.n, number(p.n_exponent)});
    out.push_back({"m", buf, p.m, number(p.m_exponent)});
  }
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const BoundReport& report) {
  os << "quantity,eps,value,log_value,exponent\n";
  for (const Line& l : report_lines(report))
    os << l.quantity << ',' << l.eps << ',' << number(l.v.value) << ',' << number(l.v.log) << ',' << l.exponent
       << '\n';
}

void write_table(std::ostream& os, const BoundReport& report) {
  const std::vector<Line> lines = report_lines(report);
  std::size_t w0 = 8, w1 = 3, w2 = 5;
  for (const Line& l : lines) {
    w0 = std::max(w0, l.quantity.size());
    w1 = std::max(w1, l.eps.size());
    w2 = std::max(w2, number(l.v.value).size());
  }
  std::size_t w3 = 9;
  for (const Line& l : lines) w3 = std::max(w3, number(l.v.log).size());
  auto row = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                 const std::string& e) {
    os << a << std::string(w0 - a.size() + 2, ' ') << b << std::string(w1 - b.size() + 2, ' ')
       << std::string(w2 - c.size(), ' ') << c << "  " << std::string(w3 - d.size(), ' ') << d << "  " << e << '\n';
  };
  row("quantity", "eps", "value", "log_value", "exponent");
  for (const Line& l : lines) row(l.quantity, l.eps, number(l.v.value), number(l.v.log), l.exponent);
}

}  // namespace nnpde
