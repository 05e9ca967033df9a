#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nnpde {

/// A positive quantity kept as its natural log; `value` is exp(log) or +inf
/// when that overflows a double.
struct LogValue {
  double log = 0.0;
  double value = 1.0;

  static LogValue from_log(double log);
  static LogValue from_value(double value);
  bool finite() const;
};

struct NetClassSpec {
  int L = 2;          // depth
  double nL = 1.0;    // parameter count
  double R = 1.0;     // weight bound
  int d = 1;          // input dimension
  double f_inf = 0.0; // sup |f| over the domain
  double g_inf = 0.0; // sup |g| over the boundary
  double eta = 1.0;
  double c = 1.0;     // constant in the complexity bounds

  void validate() const;
};

struct LipschitzConstants {
  LogValue M_i, M_b, Lambda_i, Lambda_b;
};

struct RademacherBounds {
  LogValue interior, boundary;
};

LipschitzConstants lipschitz_constants(const NetClassSpec& s);
/// Log terms are clamped at 0 for arguments below 1.
RademacherBounds rademacher_bounds(const NetClassSpec& s, double n, double m);
/// interior + alpha * boundary.
LogValue statistical_bound(const NetClassSpec& s, double n, double m, double alpha);

struct Prescription {
  double eps = 0.0, mu = 0.0;
  int d = 1;
  int L = 2;
  LogValue nL, R, n, m;
  // Exponents of eps, so that each quantity is ceil(eps^exponent).
  double nL_exponent = 0.0, R_exponent = 0.0, n_exponent = 0.0, m_exponent = 0.0;
};

/// Requires 0 < eps < 1 and 0 < mu < 1; all constants are 1.
Prescription prescribe_for_tolerance(double eps, int d, double mu);

struct BoundReport {
  bool has_class = true;  // false: prescriptions only
  NetClassSpec spec;
  double n = 0.0, m = 0.0, alpha = 0.0;
  LipschitzConstants lipschitz;
  RademacherBounds rademacher;
  LogValue E_stat;
  std::vector<Prescription> prescriptions;
};

BoundReport make_report(const NetClassSpec& s, double n, double m, double alpha,
                        const std::vector<double>& eps = {}, double mu = 0.5);
BoundReport make_prescription_report(int d, const std::vector<double>& eps, double mu);

/// Columns quantity,eps,value,log_value,exponent; prescriptions add one row per quantity and tolerance.
void write_csv(std::ostream& os, const BoundReport& report);
void write_table(std::ostream& os, const BoundReport& report);

}  // namespace nnpde
