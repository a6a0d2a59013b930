#pragma once

// Ensemble files: one JSON header line {"n", "d", "seed", "iteration"}
// terminated by '\n', then n*d native-endian float64 values, walker by walker
// (row-major N x d).

#include "aies/ensemble.hpp"

#include <json.hpp>

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace aies {

struct EnsembleHeader {
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
};

inline void write_ensemble(std::ostream& os, const Ensemble& e, std::uint64_t seed, std::uint64_t iteration) {
  const nlohmann::json header = {{"n", e.size()}, {"d", e.dim()}, {"seed", seed}, {"iteration", iteration}};
  os << header.dump() << '\n';
  // Column-major d x N storage is exactly row-major N x d.
  os.write(reinterpret_cast<const char*>(e.positions().data()),
           static_cast<std::streamsize>(sizeof(double) * e.positions().size()));
  if (!os) throw std::runtime_error("write_ensemble: stream error");
}

inline Ensemble read_ensemble(std::istream& is, EnsembleHeader* header_out = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_ensemble: missing header");
  const nlohmann::json j = nlohmann::json::parse(line);
  EnsembleHeader h{j.at("n").get<std::uint64_t>(), j.at("d").get<std::uint64_t>(), j.at("seed").get<std::uint64_t>(),
                   j.at("iteration").get<std::uint64_t>()};
  Eigen::MatrixXd x(static_cast<Eigen::Index>(h.d), static_cast<Eigen::Index>(h.n));
  is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(sizeof(double) * x.size()));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(double) * x.size()))
    throw std::runtime_error("read_ensemble: truncated payload");
  if (header_out) *header_out = h;
  return Ensemble(std::move(x));
}

}  // namespace aies
