#pragma once

#include "fonbw/models.hpp"

namespace fonbw::testing {

// Loop-demonstration parameters of the classical model.
inline CbwParams demo_cbw() { return CbwParams{0.1, 1.0, 1.0, 0.7, 0.6, 0.5, 1.0, 0.0}; }

// Asymmetric extension of the same loop.
inline PolynomialGain demo_poly() { return PolynomialGain{{0.1, 0.1, 0.01}}; }

// Identified PEA parameter sets.
inline FonbwParams identified_fonbw() {
  FonbwParams p;
  p.poly = PolynomialGain{{0.1811, -1.4037e-4, -7.7154e-8}};
  p.k_h = -3.2719e4;
  p.rho = 6.4808e-7;
  p.sigma = 1.3039e5;
  p.n = 2.0006;
  p.lambda1 = 0.9557;
  p.lambda2 = 0.6220;
  return p;
}

inline CbwGainParams identified_cbw() { return CbwGainParams{0.1547, -3.6660e5, 0.5552, 6.1987e-7, 0.0364, 0.0272, 1.0003, 0.0}; }

inline ZhuParams identified_zhu() {
  ZhuParams p;
  p.m0 = 0.1026;
  p.c0 = 2.5820e2;
  p.k0 = 1.5567e5;
  p.k1 = 4.3915e-7;
  p.x0 = 0.0;
  p.tau = 2.0408e-5;
  p.A = -0.0068;
  p.beta = 0.0457;
  p.gamma = -0.0255;
  p.delta = -0.0024;
  p.n = 1.0483;
  return p;
}

// Matched plant for cascade tests: the identified set with a slower state
// order, for which the one-sample-delay inverse loop is stable at 10 kHz.
inline FonbwParams cascade_plant() {
  FonbwParams p = identified_fonbw();
  p.lambda2 = 0.8;
  return p;
}

}  // namespace fonbw::testing
