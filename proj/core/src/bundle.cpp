#include "labornet/bundle.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace labornet {

using detail::Json;

void ModelBundle::validate() const {
  supply.validate();
  technology.validate();
  demand.validate();
  if (technology.markets() != supply.markets()) throw InputError("beta rows must equal Gamma");
  if (technology.sectors() != demand.shifters.size()) throw InputError("beta columns must equal S");
  if (!(k > 0.0)) throw InputError("k must be positive");
  if (sigma) {
    if (sigma->rows() != supply.types() || sigma->cols() != supply.markets()) {
      throw InputError("sigma must be I x Gamma");
    }
    if (!((sigma->array() >= 0.0).all()) || !sigma->allFinite()) {
      throw InputError("sigma must be finite and >= 0");
    }
  }
  if (sector_given_market) {
    const auto& m = *sector_given_market;
    if (m.rows() != supply.markets() || m.cols() != technology.sectors()) {
      throw InputError("sector_given_market must be Gamma x S");
    }
    if (!((m.array() >= 0.0).all()) || !m.allFinite()) {
      throw InputError("sector_given_market must be finite and >= 0");
    }
    for (Eigen::Index g = 0; g < m.rows(); ++g) {
      if (!(m.row(g).sum() > 0.0)) throw InputError("sector_given_market has an all-zero row");
    }
  }
}

namespace {

ModelBundle parse_bundle_fields(const Json& j);

}  // namespace

ModelBundle parse_bundle(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("invalid bundle JSON: ") + e.what());
  }
  try {
    return parse_bundle_fields(j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid bundle field: ") + e.what());
  }
}

namespace {

ModelBundle parse_bundle_fields(const Json& j) {
  using detail::field;
  ModelBundle b;
  b.supply.psi = detail::matrix_from_json(field(j, "psi"), "psi");
  b.supply.xi = detail::vector_from_json(field(j, "xi"), "xi");
  b.supply.nu = field(j, "nu").get<double>();
  b.supply.masses = detail::vector_from_json(field(j, "m"), "m");
  b.technology.beta = detail::matrix_from_json(field(j, "beta"), "beta");
  b.demand.shifters = detail::vector_from_json(field(j, "a"), "a");
  b.demand.eta = j.value("eta", 2.0);
  b.k = j.value("k", 1.0);
  if (j.contains("sigma")) b.sigma = detail::matrix_from_json(j.at("sigma"), "sigma");
  if (j.contains("sector_given_market")) {
    b.sector_given_market =
        detail::matrix_from_json(j.at("sector_given_market"), "sector_given_market");
  }
  if (j.contains("dimensions")) {
    const auto& d = j.at("dimensions");
    if (d.value("I", b.supply.types()) != b.supply.types() ||
        d.value("Gamma", b.supply.markets()) != b.supply.markets() ||
        d.value("S", b.technology.sectors()) != b.technology.sectors()) {
      throw InputError("bundle dimensions disagree with the matrices");
    }
  }
  b.validate();
  return b;
}

}  // namespace

ModelBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open bundle " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bundle(buffer.str());
}

std::string bundle_json(const ModelBundle& b) {
  Json j;
  j["dimensions"] = {{"I", b.supply.types()}, {"Gamma", b.supply.markets()}, {"S", b.technology.sectors()}};
  j["psi"] = detail::to_json(b.supply.psi);
  j["xi"] = detail::to_json(b.supply.xi);
  j["nu"] = b.supply.nu;
  j["m"] = detail::to_json(b.supply.masses);
  j["beta"] = detail::to_json(b.technology.beta);
  j["a"] = detail::to_json(b.demand.shifters);
  j["eta"] = b.demand.eta;
  j["k"] = b.k;
  if (b.sigma) j["sigma"] = detail::to_json(*b.sigma);
  if (b.sector_given_market) j["sector_given_market"] = detail::to_json(*b.sector_given_market);
  return j.dump(2) + "\n";
}

std::string equilibrium_json(const roy::EquilibriumState& s, bool include_trace) {
  Json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["final_rho"] = s.final_rho;
  j["labor_gap"] = s.labor_gap;
  j["goods_gap"] = s.goods_gap;
  j["walras_residual"] = s.walras_residual();
  j["w"] = detail::to_json(s.w);
  j["p"] = detail::to_json(s.p);
  j["labor_supply"] = detail::to_json(s.labor_supply);
  j["labor"] = detail::to_json(s.labor);
  j["y_supply"] = detail::to_json(s.y_supply);
  j["y_demand"] = detail::to_json(s.y_demand);
  j["income"] = s.income;
  j["wage_bill"] = s.wage_bill;
  j["profits"] = s.profits;
  j["choice_probabilities"] = detail::to_json(s.choices);
  if (include_trace) {
    Json t = Json::array();
    for (const auto& point : s.trace) {
      t.push_back({{"iteration", point.iteration},
                   {"labor_gap", point.labor_gap},
                   {"goods_gap", point.goods_gap},
                   {"rho", point.rho}});
    }
    j["trace"] = t;
  }
  return j.dump(2) + "\n";
}

}  // namespace labornet
