#include <cctype>
#include <sstream>

#include "sovor/formulation.hpp"

namespace sovor {

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

void write_terms(std::ostringstream& os, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [col, coef] : terms) {
    if (coef >= 0.0)
      os << (first ? "" : " + ") << coef;
    else
      os << (first ? "- " : " - ") << -coef;
    os << " " << names[col];
    first = false;
  }
  if (first) os << "0 dummy_zero";
}

}  // namespace

std::string write_lp(const MilpInstance& inst) {
  std::vector<std::string> names;
  names.reserve(inst.num_vars());
  for (const auto& b : inst.binaries)
    names.push_back("x_" + sanitize(inst.net.site_id(b.site)) + "_" +
                    sanitize(inst.workloads[b.workload].id));
  for (size_t p = 0; p < inst.path_vars.size(); ++p) {
    const auto& pv = inst.path_vars[p];
    names.push_back("w_" + sanitize(inst.workloads[pv.workload].id) + "_" +
                    sanitize(inst.net.site_id(pv.source)) + "_p" + std::to_string(p));
  }

  std::ostringstream os;
  os.precision(17);
  os << "\\ placement and routing instance\n";
  os << "\\ sites=" << inst.net.num_sites() << " workloads=" << inst.workloads.size()
     << " binaries=" << inst.num_binaries() << " paths=" << inst.path_vars.size() << "\n";
  for (const auto& g : inst.gate_log)
    os << "\\ gate fixed: x_" << sanitize(g.site) << "_" << sanitize(g.workload) << " ("
       << to_string(g.reason) << ")\n";

  os << "Minimize\n obj:";
  bool any = false;
  for (int j = 0; j < inst.num_vars(); ++j) {
    double c = j < inst.num_binaries() ? inst.obj_binaries[j]
                                       : inst.obj_paths[j - inst.num_binaries()];
    if (c == 0.0) continue;
    if (c >= 0.0)
      os << (any ? " + " : " ") << c;
    else
      os << (any ? " - " : " -") << -c;
    os << " " << names[j];
    any = true;
  }
  if (!any) os << " 0 " << (names.empty() ? "dummy_zero" : names[0]);
  os << "\n";

  os << "Subject To\n";
  for (const auto& row : inst.rows) {
    os << " " << row.name << ": ";
    write_terms(os, row.terms, names);
    switch (row.sense) {
      case RowSense::LessEq: os << " <= "; break;
      case RowSense::Equal: os << " = "; break;
      case RowSense::GreaterEq: os << " >= "; break;
    }
    os << row.rhs << "\n";
  }

  os << "Bounds\n";
  for (int j = 0; j < inst.num_binaries(); ++j) os << " 0 <= " << names[j] << " <= 1\n";
  for (int j = inst.num_binaries(); j < inst.num_vars(); ++j) os << " " << names[j] << " >= 0\n";

  if (inst.num_binaries() > 0) {
    os << "Binary\n";
    for (int j = 0; j < inst.num_binaries(); ++j) os << " " << names[j] << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace sovor
