#include "gcgarch/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "json.hpp"

namespace gcg {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(strip(line.substr(start)));
      break;
    }
    out.push_back(strip(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw Error(Error::Code::parse, where + ": bad number '" + s + "'");
  }
  return x;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Code::io, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Error::Code::io, "cannot write " + path);
  return out;
}

void flush_or_throw(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(Error::Code::io, "write failed for " + path);
}

// Reads non-empty lines; `lineno` reports 1-based positions for messages.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!strip(line).empty()) return true;
  }
  return false;
}

void require_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                    const std::string& path) {
  if (got != want) {
    std::string expect;
    for (const auto& w : want) expect += (expect.empty() ? "" : ",") + w;
    throw Error(Error::Code::parse, path + ": expected header '" + expect + "'");
  }
}

json params_to_json(const CopulaParams& c) {
  return json{{"phi_bar", c.phi_bar}, {"a", c.a}, {"b", c.b}, {"v", c.v}};
}

CopulaParams copula_from_json(const json& j) {
  CopulaParams c;
  c.phi_bar = j.at("phi_bar").get<double>();
  c.a = j.at("a").get<double>();
  c.b = j.at("b").get<double>();
  c.v = j.at("v").get<double>();
  return c;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    double back = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == x) break;
  }
  return buf;
}

std::vector<ManifestEntry> read_manifest_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw Error(Error::Code::parse, path + ": empty file");
  require_header(split_csv(line), {"symbol", "role"}, path);
  std::vector<ManifestEntry> out;
  bool seen_stock = false;
  while (next_line(in, line, lineno)) {
    const auto cells = split_csv(line);
    if (cells.size() != 2) {
      throw Error(Error::Code::parse, path + ": line " + std::to_string(lineno) +
                                          ": expected 2 fields");
    }
    ManifestEntry e;
    e.symbol = cells[0];
    if (cells[1] == "factor") {
      e.is_factor = true;
    } else if (cells[1] == "stock") {
      e.is_factor = false;
    } else {
      throw Error(Error::Code::parse, path + ": line " + std::to_string(lineno) +
                                          ": role must be factor or stock, got '" + cells[1] +
                                          "'");
    }
    if (e.symbol.empty()) {
      throw Error(Error::Code::parse, path + ": line " + std::to_string(lineno) +
                                          ": empty symbol");
    }
    if (e.is_factor && seen_stock) {
      throw Error(Error::Code::parse,
                  path + ": factors must be listed before stocks (symbol '" + e.symbol + "')");
    }
    seen_stock = seen_stock || !e.is_factor;
    for (const auto& prev : out) {
      if (prev.symbol == e.symbol) {
        throw Error(Error::Code::parse, path + ": duplicate symbol '" + e.symbol + "'");
      }
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(Error::Code::parse, path + ": no entries");
  return out;
}

ReturnPanel read_prices_csv(const std::string& prices_path, const std::string& manifest_path) {
  const auto manifest = read_manifest_csv(manifest_path);
  const int n = static_cast<int>(manifest.size());
  std::map<std::string, int> col;
  for (int j = 0; j < n; ++j) col[manifest[j].symbol] = j;

  auto in = open_in(prices_path);
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) {
    throw Error(Error::Code::parse, prices_path + ": empty file");
  }
  require_header(split_csv(line), {"date", "symbol", "close"}, prices_path);

  // date -> per-symbol close; map keeps dates sorted (ISO strings sort by day).
  std::map<std::string, std::vector<double>> grid;
  while (next_line(in, line, lineno)) {
    const auto cells = split_csv(line);
    const std::string at = prices_path + ": line " + std::to_string(lineno);
    if (cells.size() != 3) throw Error(Error::Code::parse, at + ": expected 3 fields");
    if (!is_iso_date(cells[0])) {
      throw Error(Error::Code::parse, at + ": bad date '" + cells[0] + "'");
    }
    const auto it = col.find(cells[1]);
    if (it == col.end()) {
      throw Error(Error::Code::parse, at + ": symbol '" + cells[1] + "' not in manifest");
    }
    const double close = parse_double(cells[2], at);
    auto& row = grid.try_emplace(cells[0], n, std::numeric_limits<double>::quiet_NaN())
                    .first->second;
    if (!std::isnan(row[it->second])) {
      throw Error(Error::Code::parse,
                  at + ": duplicate price for " + cells[1] + " on " + cells[0]);
    }
    row[it->second] = close;
  }
  if (grid.size() < 2) {
    throw Error(Error::Code::parse, prices_path + ": need at least two dates");
  }

  MatrixXd prices(static_cast<Eigen::Index>(grid.size()), n);
  std::vector<std::string> dates;
  dates.reserve(grid.size());
  Eigen::Index t = 0;
  for (const auto& [date, row] : grid) {
    for (int j = 0; j < n; ++j) {
      if (std::isnan(row[j])) {
        throw Error(Error::Code::parse, prices_path + ": missing price for " +
                                            manifest[j].symbol + " on " + date);
      }
      prices(t, j) = row[j];
    }
    dates.push_back(date);
    ++t;
  }

  ReturnPanel panel;
  panel.r = log_returns(prices);
  panel.dates.assign(dates.begin() + 1, dates.end());
  for (const auto& e : manifest) {
    panel.symbols.push_back(e.symbol);
    panel.n_factors += e.is_factor ? 1 : 0;
  }
  panel.validate();
  return panel;
}

void write_returns_csv(const ReturnPanel& panel, const std::string& path) {
  panel.validate();
  auto out = open_out(path);
  out << "date";
  for (const auto& s : panel.symbols) out << ',' << s;
  out << '\n';
  for (int t = 0; t < panel.days(); ++t) {
    out << panel.dates[t];
    for (int j = 0; j < panel.n_series(); ++j) out << ',' << format_double(panel.r(t, j));
    out << '\n';
  }
  flush_or_throw(out, path);
}

ReturnPanel read_returns_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw Error(Error::Code::parse, path + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "date") {
    throw Error(Error::Code::parse, path + ": expected header 'date,<symbol>...'");
  }
  ReturnPanel panel;
  panel.symbols.assign(header.begin() + 1, header.end());
  const int n = static_cast<int>(panel.symbols.size());

  std::vector<std::vector<double>> rows;
  while (next_line(in, line, lineno)) {
    const auto cells = split_csv(line);
    const std::string at = path + ": line " + std::to_string(lineno);
    if (static_cast<int>(cells.size()) != n + 1) {
      throw Error(Error::Code::parse, at + ": expected " + std::to_string(n + 1) + " fields");
    }
    if (!is_iso_date(cells[0])) {
      throw Error(Error::Code::parse, at + ": bad date '" + cells[0] + "'");
    }
    panel.dates.push_back(cells[0]);
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) row[j] = parse_double(cells[j + 1], at);
    rows.push_back(std::move(row));
  }
  panel.r.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int j = 0; j < n; ++j) panel.r(static_cast<Eigen::Index>(t), j) = rows[t][j];
  }
  panel.validate();
  return panel;
}

ReturnPanel read_returns_csv(const std::string& path, const std::string& manifest_path) {
  const auto manifest = read_manifest_csv(manifest_path);
  ReturnPanel raw = read_returns_csv(path);
  if (raw.symbols.size() != manifest.size()) {
    throw Error(Error::Code::parse, path + ": column count does not match manifest");
  }
  ReturnPanel panel;
  panel.dates = raw.dates;
  panel.r.resize(raw.r.rows(), raw.r.cols());
  for (std::size_t j = 0; j < manifest.size(); ++j) {
    const auto it = std::find(raw.symbols.begin(), raw.symbols.end(), manifest[j].symbol);
    if (it == raw.symbols.end()) {
      throw Error(Error::Code::parse,
                  path + ": manifest symbol '" + manifest[j].symbol + "' missing");
    }
    const auto src = static_cast<Eigen::Index>(it - raw.symbols.begin());
    panel.r.col(static_cast<Eigen::Index>(j)) = raw.r.col(src);
    panel.symbols.push_back(manifest[j].symbol);
    panel.n_factors += manifest[j].is_factor ? 1 : 0;
  }
  panel.validate();
  return panel;
}

void write_model_json(const FittedModel& model, const std::string& path) {
  model.validate();
  json j;
  j["schema_version"] = 1;
  j["m"] = model.m;
  j["p"] = model.p;
  j["m_sc"] = model.m_sc;
  j["symbols"] = model.symbols;

  j["marginals"] = json::array();
  for (int i = 0; i < model.m + model.p; ++i) {
    const auto& g = model.marginals[i];
    j["marginals"].push_back(json{{"symbol", model.symbols[i]},
                                  {"omega", g.omega},
                                  {"alpha", g.alpha},
                                  {"beta", g.beta},
                                  {"v", g.v}});
  }

  json edges = json::array();
  for (int a = 0; a < model.m; ++a) {
    for (int b = 0; b < model.m; ++b) {
      if (model.dag.edge(a, b)) edges.push_back(json::array({a, b}));
    }
  }
  j["dag"] = json{{"m", model.m}, {"edges", edges}, {"order", model.order}};

  const auto units = dag_unit_labels(model.dag, model.order);
  j["dag_copulas"] = json::array();
  for (std::size_t u = 0; u < units.size(); ++u) {
    json e = params_to_json(model.dag_copulas[u]);
    e["child"] = model.symbols[units[u].child];
    e["parent"] = model.symbols[units[u].parent];
    json cond = json::array();
    for (int c : units[u].cond) cond.push_back(model.symbols[c]);
    e["cond"] = cond;
    j["dag_copulas"].push_back(std::move(e));
  }

  j["stock_copulas"] = json::array();
  for (int s = 0; s < model.p; ++s) {
    json levels = json::array();
    for (int l = 0; l < model.m; ++l) {
      json e = params_to_json(model.stock_copulas[s][l]);
      e["factor"] = model.symbols[model.order[l]];
      levels.push_back(std::move(e));
    }
    j["stock_copulas"].push_back(
        json{{"symbol", model.symbols[model.m + s]}, {"levels", std::move(levels)}});
  }

  auto out = open_out(path);
  out << j.dump(2) << '\n';
  flush_or_throw(out, path);
}

FittedModel read_model_json(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Error::Code::parse, path + ": " + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != 1) {
      throw Error(Error::Code::unsupported, path + ": unsupported schema_version");
    }
    const int m = j.at("m").get<int>();
    const int p = j.at("p").get<int>();

    Dag dag(m);
    for (const auto& e : j.at("dag").at("edges")) {
      dag.set_edge(e.at(0).get<int>(), e.at(1).get<int>(), true);
    }
    FittedModel model =
        make_model(m, p, j.at("symbols").get<std::vector<std::string>>(), dag);
    model.m_sc = j.at("m_sc").get<int>();
    model.order = j.at("dag").at("order").get<std::vector<int>>();

    const auto& marg = j.at("marginals");
    if (static_cast<int>(marg.size()) != m + p) {
      throw Error(Error::Code::parse, path + ": marginal count mismatch");
    }
    for (int i = 0; i < m + p; ++i) {
      if (marg[i].at("symbol").get<std::string>() != model.symbols[i]) {
        throw Error(Error::Code::parse, path + ": marginal symbol order mismatch");
      }
      auto& g = model.marginals[i];
      g.omega = marg[i].at("omega").get<double>();
      g.alpha = marg[i].at("alpha").get<double>();
      g.beta = marg[i].at("beta").get<double>();
      g.v = marg[i].at("v").get<double>();
    }

    const auto units = dag_unit_labels(model.dag, model.order);
    const auto& dc = j.at("dag_copulas");
    if (dc.size() != units.size()) {
      throw Error(Error::Code::parse, path + ": dag_copulas count mismatch");
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (dc[u].at("child").get<std::string>() != model.symbols[units[u].child] ||
          dc[u].at("parent").get<std::string>() != model.symbols[units[u].parent]) {
        throw Error(Error::Code::parse, path + ": dag_copulas unit labels mismatch");
      }
      const auto cond = dc[u].at("cond").get<std::vector<std::string>>();
      if (cond.size() != units[u].cond.size()) {
        throw Error(Error::Code::parse, path + ": dag_copulas conditioning mismatch");
      }
      for (std::size_t c = 0; c < cond.size(); ++c) {
        if (cond[c] != model.symbols[units[u].cond[c]]) {
          throw Error(Error::Code::parse, path + ": dag_copulas conditioning mismatch");
        }
      }
      model.dag_copulas[u] = copula_from_json(dc[u]);
    }

    const auto& sc = j.at("stock_copulas");
    if (static_cast<int>(sc.size()) != p) {
      throw Error(Error::Code::parse, path + ": stock_copulas count mismatch");
    }
    for (int s = 0; s < p; ++s) {
      if (sc[s].at("symbol").get<std::string>() != model.symbols[m + s]) {
        throw Error(Error::Code::parse, path + ": stock symbol order mismatch");
      }
      const auto& levels = sc[s].at("levels");
      if (static_cast<int>(levels.size()) != m) {
        throw Error(Error::Code::parse, path + ": stock copula level count mismatch");
      }
      for (int l = 0; l < m; ++l) {
        if (levels[l].at("factor").get<std::string>() != model.symbols[model.order[l]]) {
          throw Error(Error::Code::parse, path + ": stock copula factor label mismatch");
        }
        model.stock_copulas[s][l] = copula_from_json(levels[l]);
      }
    }

    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw Error(Error::Code::parse, path + ": " + e.what());
  }
}

void write_marginals_csv(const std::vector<std::string>& symbols,
                         const std::vector<GarchParams>& params,
                         const std::vector<double>& logliks, const std::string& path) {
  if (symbols.size() != params.size() || symbols.size() != logliks.size()) {
    throw Error(Error::Code::invalid_argument, "write_marginals_csv: length mismatch");
  }
  auto out = open_out(path);
  out << "symbol,omega,alpha,beta,v,loglik\n";
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    out << symbols[i] << ',' << format_double(params[i].omega) << ','
        << format_double(params[i].alpha) << ',' << format_double(params[i].beta) << ','
        << format_double(params[i].v) << ',' << format_double(logliks[i]) << '\n';
  }
  flush_or_throw(out, path);
}

void write_scenarios_csv(const MatrixXd& scenarios, const std::vector<std::string>& symbols,
                         const std::string& path) {
  if (static_cast<Eigen::Index>(symbols.size()) != scenarios.cols()) {
    throw Error(Error::Code::invalid_argument, "write_scenarios_csv: symbol count mismatch");
  }
  auto out = open_out(path);
  out << "k,symbol,return\n";
  for (Eigen::Index k = 0; k < scenarios.rows(); ++k) {
    for (Eigen::Index jcol = 0; jcol < scenarios.cols(); ++jcol) {
      out << k << ',' << symbols[jcol] << ',' << format_double(scenarios(k, jcol)) << '\n';
    }
  }
  flush_or_throw(out, path);
}

MatrixXd read_scenarios_csv(const std::string& path, std::vector<std::string>* symbols_out) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) throw Error(Error::Code::parse, path + ": empty file");
  require_header(split_csv(line), {"k", "symbol", "return"}, path);

  std::vector<std::string> symbols;
  std::map<std::string, int> col;
  std::vector<std::vector<double>> rows;
  while (next_line(in, line, lineno)) {
    const auto cells = split_csv(line);
    const std::string at = path + ": line " + std::to_string(lineno);
    if (cells.size() != 3) throw Error(Error::Code::parse, at + ": expected 3 fields");
    const double kd = parse_double(cells[0], at);
    const auto k = static_cast<std::size_t>(kd);
    if (kd != static_cast<double>(k)) {
      throw Error(Error::Code::parse, at + ": scenario index must be an integer");
    }
    auto [it, inserted] = col.try_emplace(cells[1], static_cast<int>(symbols.size()));
    if (inserted) symbols.push_back(cells[1]);
    if (k >= rows.size()) {
      rows.resize(k + 1);
    }
    auto& row = rows[k];
    if (row.size() < symbols.size()) row.resize(symbols.size(),
                                                std::numeric_limits<double>::quiet_NaN());
    if (static_cast<std::size_t>(it->second) < row.size() && !std::isnan(row[it->second])) {
      throw Error(Error::Code::parse, at + ": duplicate entry");
    }
    row[it->second] = parse_double(cells[2], at);
  }
  if (rows.empty()) throw Error(Error::Code::parse, path + ": no scenarios");

  MatrixXd out(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(symbols.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != symbols.size()) {
      rows[k].resize(symbols.size(), std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t jcol = 0; jcol < symbols.size(); ++jcol) {
      if (std::isnan(rows[k][jcol])) {
        throw Error(Error::Code::parse, path + ": missing value for scenario " +
                                            std::to_string(k) + ", symbol " + symbols[jcol]);
      }
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(jcol)) = rows[k][jcol];
    }
  }
  if (symbols_out) *symbols_out = symbols;
  return out;
}

}  // namespace gcg
