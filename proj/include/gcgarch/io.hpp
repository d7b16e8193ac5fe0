#pragma once

#include <string>
#include <vector>

#include "gcgarch/types.hpp"

namespace gcg {

// Role declaration for one panel column. Manifest rows are `symbol,role`
// with role `factor` or `stock`; row order fixes the column order, and all
// factors must be listed before the first stock.
struct ManifestEntry {
  std::string symbol;
  bool is_factor = false;
};

std::vector<ManifestEntry> read_manifest_csv(const std::string& path);

// Long-format price file with header `date,symbol,close`, ISO-8601 dates.
// Requires a complete date x symbol grid; any hole or duplicate is an error.
// Columns are ordered per the manifest and converted to percent log returns.
ReturnPanel read_prices_csv(const std::string& prices_path, const std::string& manifest_path);

// Wide format: header `date,<symbol>...`, one row per day, full precision.
void write_returns_csv(const ReturnPanel& panel, const std::string& path);
ReturnPanel read_returns_csv(const std::string& path);  // n_factors left at 0
ReturnPanel read_returns_csv(const std::string& path, const std::string& manifest_path);

// One JSON document holding every fitted parameter; schema_version field
// guards future layout changes. Copula entries carry symbol labels that are
// checked against the DAG on load, so a hand-edited file cannot silently
// shift parameters between units.
void write_model_json(const FittedModel& model, const std::string& path);
FittedModel read_model_json(const std::string& path);

// Rows `symbol,omega,alpha,beta,v,loglik` in column order.
void write_marginals_csv(const std::vector<std::string>& symbols,
                         const std::vector<GarchParams>& params,
                         const std::vector<double>& logliks, const std::string& path);

// Long format `k,symbol,return`, k counting from 0, percent log returns.
void write_scenarios_csv(const MatrixXd& scenarios, const std::vector<std::string>& symbols,
                         const std::string& path);
MatrixXd read_scenarios_csv(const std::string& path,
                            std::vector<std::string>* symbols_out = nullptr);

// Shortest text form that parses back to the identical double.
std::string format_double(double x);

}  // namespace gcg
