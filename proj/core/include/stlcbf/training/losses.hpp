#pragma once

#include <span>

#include "stlcbf/dynamics/system.hpp"
#include "stlcbf/neural/net.hpp"
#include "stlcbf/safeset/grid.hpp"

namespace stlcbf::training {

// sum over in-safe samples of ReLU(-B(s) - eta)
double loss_l1(const neural::CertNet& barrier,
               std::span<const safeset::AugPoint> batch, double eta);

// sum over out-safe samples of ReLU(B(s) + lambda - eta)
double loss_l2(const neural::CertNet& barrier,
               std::span<const safeset::AugPoint> batch, double eta,
               double lambda);

// sum over samples of ReLU(-<dB/dx, f(x, g(s))> - dB/dt - alpha*B(s) - eta)
double loss_l3(const neural::CertNet& barrier, const neural::CertNet& controller,
               const dyn::SystemModel& sys,
               std::span<const safeset::AugPoint> batch, double eta,
               double alpha);

}  // namespace stlcbf::training
