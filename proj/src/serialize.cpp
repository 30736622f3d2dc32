#include "qmetro/serialize.hpp"

#include <stdexcept>
#include <string>

namespace qmetro {

namespace {

const Json& require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string("serialize: missing key '") + key + "'");
  return *it;
}

} // namespace

Json to_json(const Matrix& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  const Index rows = require(j, "rows").get<Index>();
  const Index cols = require(j, "cols").get<Index>();
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("serialize: matrix dimensions must be positive");
  const Json& data = require(j, "data");
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
    throw std::invalid_argument("serialize: matrix data length mismatch");
  Matrix m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c, ++k) {
      const Json& e = data[static_cast<std::size_t>(k)];
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("serialize: matrix entries must be [re, im] pairs");
      m(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

Json to_json(const PartitionLayout& layout) {
  return Json{{"parties", layout.parties},
              {"copies", layout.copies},
              {"local_dim", layout.local_dim}};
}

PartitionLayout layout_from_json(const Json& j) {
  return PartitionLayout{require(j, "parties").get<int>(),
                         require(j, "copies").get<int>(),
                         require(j, "local_dim").get<int>()};
}

Json to_json(const StateWithLayout& s) {
  return Json{{"layout", to_json(s.layout)}, {"rho", to_json(s.rho.mat())}};
}

StateWithLayout state_from_json(const Json& j) {
  PartitionLayout layout = layout_from_json(require(j, "layout"));
  Matrix rho = matrix_from_json(require(j, "rho"));
  if (rho.rows() != layout.global_dim())
    throw std::invalid_argument("serialize: state dimension does not match layout");
  return StateWithLayout{DensityMatrix(std::move(rho)), layout};
}

Json to_json(const GainReport& r) {
  Json terms = Json::array();
  for (const auto& h : r.local_terms) terms.push_back(to_json(h.mat()));
  return Json{{"fq", r.fq},
              {"fq_sep", r.fq_sep},
              {"gain", r.gain},
              {"local_terms", std::move(terms)}};
}

namespace {

const char* mode_name(AnsatzMode mode) {
  switch (mode) {
    case AnsatzMode::automatic: return "automatic";
    case AnsatzMode::qubit_ball: return "qubit_ball";
    case AnsatzMode::pinned_full: return "pinned_full";
    case AnsatzMode::pinned_product: return "pinned_product";
  }
  throw std::logic_error("serialize: unknown ansatz mode");
}

AnsatzMode mode_from_name(const std::string& name) {
  if (name == "automatic") return AnsatzMode::automatic;
  if (name == "qubit_ball") return AnsatzMode::qubit_ball;
  if (name == "pinned_full") return AnsatzMode::pinned_full;
  if (name == "pinned_product") return AnsatzMode::pinned_product;
  throw std::invalid_argument("serialize: unknown ansatz mode '" + name + "'");
}

} // namespace

Json to_json(const OptimizerConfig& c) {
  return Json{{"restarts", c.restarts},
              {"max_iters", c.max_iters},
              {"step_schedule", c.step_schedule},
              {"tol", c.tol},
              {"seed", c.seed},
              {"mode", mode_name(c.mode)}};
}

OptimizerConfig optimizer_config_from_json(const Json& j) {
  OptimizerConfig c;
  if (auto it = j.find("restarts"); it != j.end()) c.restarts = it->get<int>();
  if (auto it = j.find("max_iters"); it != j.end()) c.max_iters = it->get<int>();
  if (auto it = j.find("step_schedule"); it != j.end())
    c.step_schedule = it->get<std::vector<double>>();
  if (auto it = j.find("tol"); it != j.end()) c.tol = it->get<double>();
  if (auto it = j.find("seed"); it != j.end()) c.seed = it->get<std::uint64_t>();
  if (auto it = j.find("mode"); it != j.end()) c.mode = mode_from_name(it->get<std::string>());
  c.validate();
  return c;
}

} // namespace qmetro
