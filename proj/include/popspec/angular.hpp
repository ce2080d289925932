#pragma once

// Wigner 3j/6j symbols and Clebsch-Gordan coefficients for the small
// angular momenta of alkali D lines. All quantum numbers are passed as
// twice their value (two_j = 2j) so half-integers stay exact integers.
//
// Each symbol is computed from the Racah factorial sum in exact rational
// arithmetic and carried around as a signed square: value = sign*sqrt(sq).
// Squared dipole moments are then exact rationals, which the coupling
// matrices (1/12, 1/4, 1/2 pattern) rely on.

#include <boost/multiprecision/cpp_int.hpp>

namespace popspec {

using Rational = boost::multiprecision::cpp_rational;

// value = sign * sqrt(square), square >= 0, sign in {-1,0,+1}
struct SignedSquare {
  int sign = 0;
  Rational square = 0;

  double value() const;
  bool is_zero() const { return sign == 0; }
  // exact product of two symbols' squares, sign multiplied
  SignedSquare operator*(const SignedSquare& o) const {
    return {sign * o.sign, square * o.square};
  }
};

// true when (two_j, two_m) is a well-formed projection: |m| <= j and
// j - m integer
bool valid_jm(int two_j, int two_m);

// true when (j1, j2, j3) satisfy the triangle rule with integer perimeter
bool triangle_ok(int two_j1, int two_j2, int two_j3);

SignedSquare wigner3j_exact(int two_j1, int two_j2, int two_j3,
                            int two_m1, int two_m2, int two_m3);
SignedSquare wigner6j_exact(int two_j1, int two_j2, int two_j3,
                            int two_j4, int two_j5, int two_j6);
// <j1 m1 j2 m2 | j3 m3>, Condon-Shortley phase
SignedSquare clebsch_gordan_exact(int two_j1, int two_m1, int two_j2,
                                  int two_m2, int two_j3, int two_m3);

double wigner3j(int two_j1, int two_j2, int two_j3,
                int two_m1, int two_m2, int two_m3);
double wigner6j(int two_j1, int two_j2, int two_j3,
                int two_j4, int two_j5, int two_j6);
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j3, int two_m3);

}  // namespace popspec
