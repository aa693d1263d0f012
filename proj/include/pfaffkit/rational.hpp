#ifndef PFAFFKIT_RATIONAL_HPP
#define PFAFFKIT_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

namespace pfaffkit {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace pfaffkit

#endif
