#include "selmut/io.hpp"

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace selmut {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double finite_or_clamped(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return 0.0;
  return v > 0 ? DBL_MAX : -DBL_MAX;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << "line " << line_no << ": cannot parse " << what << " from '" << s << "'";
    throw std::runtime_error(os.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "time,trait,value,space,K\n";
  const std::string space = to_string(traj.space);
  const std::string K = fmt(traj.scaling ? traj.scaling->K : 0.0);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const LatticeField& f = traj.fields[k];
    const std::string t = fmt(traj.times[k]);
    for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i)
      os << t << ',' << fmt(f.window.node(i)) << ',' << fmt(f.at(i)) << ',' << space << ',' << K
         << '\n';
  }
  return os.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  atomic_write(path, trajectory_csv(traj));
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
          std::vector<std::string>{"time", "trait", "value", "space", "K"})
    throw std::runtime_error("'" + path + "': expected header time,trait,value,space,K");

  Trajectory traj;
  std::vector<double> traits, values;
  std::vector<std::vector<double>> blocks;
  std::vector<double> first_traits;
  double cur_time = 0.0;
  bool any = false, first_block = true;
  std::string space_str;
  double K = 0.0;
  std::size_t line_no = 1;

  auto close_block = [&](std::vector<double>&& vals, std::vector<double>&& trs) {
    if (first_block) {
      first_traits = trs;
      first_block = false;
    } else if (trs != first_traits) {
      throw std::runtime_error("'" + path + "': trait column changes between time blocks");
    }
    blocks.push_back(std::move(vals));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols = split_csv_line(line);
    if (cols.size() != 5) {
      std::ostringstream os;
      os << "'" << path << "' line " << line_no << ": expected 5 columns, found " << cols.size();
      throw std::runtime_error(os.str());
    }
    double t = parse_double(cols[0], "time", line_no);
    double x = parse_double(cols[1], "trait", line_no);
    double v = parse_double(cols[2], "value", line_no);
    double Krow = parse_double(cols[4], "K", line_no);
    if (!any) {
      space_str = cols[3];
      K = Krow;
      cur_time = t;
      traj.times.push_back(t);
      any = true;
    } else {
      if (cols[3] != space_str)
        throw std::runtime_error("'" + path + "': space column must be constant");
      if (Krow != K) throw std::runtime_error("'" + path + "': K column must be constant");
      if (t != cur_time) {
        close_block(std::move(values), std::move(traits));
        values.clear();
        traits.clear();
        cur_time = t;
        traj.times.push_back(t);
      }
    }
    traits.push_back(x);
    values.push_back(v);
  }
  if (!any) throw std::runtime_error("'" + path + "': no data rows");
  close_block(std::move(values), std::move(traits));

  if (first_traits.size() < 2)
    throw std::runtime_error("'" + path + "': cannot infer the lattice step from a single node");
  double step = first_traits[1] - first_traits[0];
  if (!(step > 0.0))
    throw std::runtime_error("'" + path + "': trait column must increase strictly");
  for (std::size_t i = 1; i < first_traits.size(); ++i)
    if (std::abs(first_traits[i] - first_traits[i - 1] - step) > 1e-9 * step)
      throw std::runtime_error("'" + path + "': trait column is not uniformly spaced");

  TraitWindow win;
  win.step = step;
  win.i_min = std::llround(first_traits.front() / step);
  win.i_max = win.i_min + static_cast<std::int64_t>(first_traits.size()) - 1;
  win.x_min = first_traits.front();
  win.x_max = first_traits.back();
  if (std::abs(win.node(win.i_min) - first_traits.front()) > 1e-9 * step)
    throw std::runtime_error("'" + path + "': trait column is not aligned with i * step");

  traj.space = space_from_string(space_str);
  if (K != 0.0) {
    if (!(K > 1.0)) throw std::runtime_error("'" + path + "': K must exceed 1 (or be 0)");
    ScalingParams s;
    s.K = K;
    s.log_K = std::log(K);
    s.delta_K = step;
    s.h_K = step * s.log_K;
    if (!(s.h_K > 0.0) || !(s.h_K < 1.0))
      throw std::runtime_error("'" + path + "': step and K give a mutation scale outside (0, 1)");
    traj.scaling = s;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    LatticeField f;
    f.window = win;
    f.space = traj.space;
    f.values = std::move(blocks[k]);
    traj.max_slopes.push_back(traj.space == Space::n ? 0.0 : max_discrete_slope(f));
    traj.fields.push_back(std::move(f));
  }
  for (std::size_t k = 1; k < traj.times.size(); ++k)
    if (!(traj.times[k] > traj.times[k - 1]))
      throw std::runtime_error("'" + path + "': time blocks must increase strictly");
  return traj;
}

std::string convergence_csv(const std::vector<ConvergenceRecord>& records) {
  std::ostringstream os;
  os << "K,log_K,delta_K,h_K,sup_error,max_slope,runtime_seconds\n";
  for (const ConvergenceRecord& r : records)
    os << fmt(r.K) << ',' << fmt(r.log_K) << ',' << fmt(r.delta_K) << ',' << fmt(r.h_K) << ','
       << fmt(r.sup_error) << ',' << fmt(r.max_slope) << ',' << fmt(r.runtime_seconds) << '\n';
  return os.str();
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRecord>& records) {
  atomic_write(path, convergence_csv(records));
}

std::vector<ConvergenceRecord> read_convergence_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"K", "log_K", "delta_K", "h_K",
                                                       "sup_error", "max_slope",
                                                       "runtime_seconds"})
    throw std::runtime_error(
        "'" + path + "': expected header K,log_K,delta_K,h_K,sup_error,max_slope,runtime_seconds");
  std::vector<ConvergenceRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols = split_csv_line(line);
    if (cols.size() != 7) {
      std::ostringstream os;
      os << "'" << path << "' line " << line_no << ": expected 7 columns, found " << cols.size();
      throw std::runtime_error(os.str());
    }
    ConvergenceRecord r;
    r.K = parse_double(cols[0], "K", line_no);
    r.log_K = parse_double(cols[1], "log_K", line_no);
    r.delta_K = parse_double(cols[2], "delta_K", line_no);
    r.h_K = parse_double(cols[3], "h_K", line_no);
    r.sup_error = parse_double(cols[4], "sup_error", line_no);
    r.max_slope = parse_double(cols[5], "max_slope", line_no);
    r.runtime_seconds = parse_double(cols[6], "runtime_seconds", line_no);
    out.push_back(r);
  }
  return out;
}

std::string reports_json(const std::vector<CheckReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckReport& rep : reports) {
    nlohmann::json loc = nlohmann::json::object();
    for (const auto& [key, value] : rep.worst_location) loc[key] = finite_or_clamped(value);
    arr.push_back({{"check_id", rep.check_id},
                   {"passed", rep.passed},
                   {"worst_margin", finite_or_clamped(rep.worst_margin)},
                   {"worst_location", loc},
                   {"tolerance", finite_or_clamped(rep.tolerance)}});
  }
  return arr.dump(2) + "\n";
}

void write_reports_json(const std::string& path, const std::vector<CheckReport>& reports) {
  atomic_write(path, reports_json(reports));
}

std::vector<CheckReport> reports_from_json(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::runtime_error("report JSON must be an array");
  std::vector<CheckReport> out;
  for (const nlohmann::json& obj : arr) {
    CheckReport rep;
    rep.check_id = obj.at("check_id").get<std::string>();
    rep.passed = obj.at("passed").get<bool>();
    rep.worst_margin = obj.at("worst_margin").get<double>();
    rep.tolerance = obj.at("tolerance").get<double>();
    for (const auto& [key, value] : obj.at("worst_location").items())
      rep.worst_location[key] = value.get<double>();
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace selmut
