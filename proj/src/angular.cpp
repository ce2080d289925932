#include "popspec/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace popspec {

using boost::multiprecision::cpp_int;

namespace {

// by value: growing the cache reallocates, so references would dangle when
// several factorials appear in one expression
cpp_int factorial(int n) {
  static std::vector<cpp_int> cache = {1};
  if (n < 0) throw std::logic_error("factorial of negative argument");
  while ((int)cache.size() <= n) cache.push_back(cache.back() * (int)cache.size());
  return cache[n];
}

// Delta(j1,j2,j3) = (j1+j2-j3)! (j1-j2+j3)! (-j1+j2+j3)! / (j1+j2+j3+1)!
Rational triangle_delta(int two_j1, int two_j2, int two_j3) {
  int a = (two_j1 + two_j2 - two_j3) / 2;
  int b = (two_j1 - two_j2 + two_j3) / 2;
  int c = (-two_j1 + two_j2 + two_j3) / 2;
  int p = (two_j1 + two_j2 + two_j3) / 2 + 1;
  return Rational(factorial(a) * factorial(b) * factorial(c), factorial(p));
}

int sgn(const Rational& r) { return r == 0 ? 0 : (r < 0 ? -1 : 1); }

}  // namespace

double SignedSquare::value() const {
  if (sign == 0) return 0.0;
  return sign * std::sqrt(square.convert_to<double>());
}

bool valid_jm(int two_j, int two_m) {
  return two_j >= 0 && std::abs(two_m) <= two_j && (two_j - two_m) % 2 == 0;
}

bool triangle_ok(int two_j1, int two_j2, int two_j3) {
  if ((two_j1 + two_j2 + two_j3) % 2 != 0) return false;
  return two_j3 >= std::abs(two_j1 - two_j2) && two_j3 <= two_j1 + two_j2;
}

SignedSquare wigner3j_exact(int two_j1, int two_j2, int two_j3,
                            int two_m1, int two_m2, int two_m3) {
  if (!valid_jm(two_j1, two_m1) || !valid_jm(two_j2, two_m2) ||
      !valid_jm(two_j3, two_m3))
    return {};
  if (two_m1 + two_m2 + two_m3 != 0) return {};
  if (!triangle_ok(two_j1, two_j2, two_j3)) return {};

  int j1pm1 = (two_j1 + two_m1) / 2, j1mm1 = (two_j1 - two_m1) / 2;
  int j2pm2 = (two_j2 + two_m2) / 2, j2mm2 = (two_j2 - two_m2) / 2;
  int j3pm3 = (two_j3 + two_m3) / 2, j3mm3 = (two_j3 - two_m3) / 2;
  int a1 = (two_j1 + two_j2 - two_j3) / 2;

  int kmin = std::max({0, (two_j2 - two_j3 - two_m1) / 2,
                       (two_j1 - two_j3 + two_m2) / 2});
  int kmax = std::min({a1, j1mm1, j2pm2});
  if (kmin > kmax) return {};

  Rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k) * factorial(a1 - k) * factorial(j1mm1 - k) *
                  factorial(j2pm2 - k) *
                  factorial((two_j3 - two_j2 + two_m1) / 2 + k) *
                  factorial((two_j3 - two_j1 - two_m2) / 2 + k);
    Rational term(1, den);
    sum += (k % 2 == 0) ? term : -term;
  }
  if (sum == 0) return {};

  Rational pre = triangle_delta(two_j1, two_j2, two_j3) *
                 Rational(factorial(j1pm1) * factorial(j1mm1) *
                          factorial(j2pm2) * factorial(j2mm2) *
                          factorial(j3pm3) * factorial(j3mm3));
  int phase = ((two_j1 - two_j2 - two_m3) / 2) % 2 == 0 ? 1 : -1;
  return {phase * sgn(sum), pre * sum * sum};
}

SignedSquare wigner6j_exact(int two_j1, int two_j2, int two_j3,
                            int two_j4, int two_j5, int two_j6) {
  if (!triangle_ok(two_j1, two_j2, two_j3) ||
      !triangle_ok(two_j1, two_j5, two_j6) ||
      !triangle_ok(two_j4, two_j2, two_j6) ||
      !triangle_ok(two_j4, two_j5, two_j3))
    return {};

  int t1 = (two_j1 + two_j2 + two_j3) / 2;
  int t2 = (two_j1 + two_j5 + two_j6) / 2;
  int t3 = (two_j4 + two_j2 + two_j6) / 2;
  int t4 = (two_j4 + two_j5 + two_j3) / 2;
  int q1 = (two_j1 + two_j2 + two_j4 + two_j5) / 2;
  int q2 = (two_j2 + two_j3 + two_j5 + two_j6) / 2;
  int q3 = (two_j3 + two_j1 + two_j6 + two_j4) / 2;

  int kmin = std::max({t1, t2, t3, t4});
  int kmax = std::min({q1, q2, q3});
  if (kmin > kmax) return {};

  Rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k - t1) * factorial(k - t2) * factorial(k - t3) *
                  factorial(k - t4) * factorial(q1 - k) * factorial(q2 - k) *
                  factorial(q3 - k);
    Rational term(factorial(k + 1), den);
    sum += (k % 2 == 0) ? term : -term;
  }
  if (sum == 0) return {};

  Rational pre = triangle_delta(two_j1, two_j2, two_j3) *
                 triangle_delta(two_j1, two_j5, two_j6) *
                 triangle_delta(two_j4, two_j2, two_j6) *
                 triangle_delta(two_j4, two_j5, two_j3);
  return {sgn(sum), pre * sum * sum};
}

SignedSquare clebsch_gordan_exact(int two_j1, int two_m1, int two_j2,
                                  int two_m2, int two_j3, int two_m3) {
  if (two_m1 + two_m2 != two_m3) return {};
  SignedSquare tj = wigner3j_exact(two_j1, two_j2, two_j3,
                                   two_m1, two_m2, -two_m3);
  if (tj.is_zero()) return {};
  int phase = ((two_j1 - two_j2 + two_m3) / 2) % 2 == 0 ? 1 : -1;
  return {phase * tj.sign, Rational(two_j3 + 1) * tj.square};
}

double wigner3j(int two_j1, int two_j2, int two_j3,
                int two_m1, int two_m2, int two_m3) {
  return wigner3j_exact(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3).value();
}

double wigner6j(int two_j1, int two_j2, int two_j3,
                int two_j4, int two_j5, int two_j6) {
  return wigner6j_exact(two_j1, two_j2, two_j3, two_j4, two_j5, two_j6).value();
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j3, int two_m3) {
  return clebsch_gordan_exact(two_j1, two_m1, two_j2, two_m2, two_j3, two_m3)
      .value();
}

}  // namespace popspec
