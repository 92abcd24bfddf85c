#pragma once

#include <string>

#include "stlcbf/neural/net.hpp"

namespace stlcbf::neural {

// JSON model format, version 1. Weights are stored row-major with full
// round-trip precision; load(save(net)) reproduces outputs bit-exactly.
std::string save_model(const CertNet& net);
CertNet load_model(const std::string& text);

void save_model_file(const CertNet& net, const std::string& path);
CertNet load_model_file(const std::string& path);

}  // namespace stlcbf::neural
