#include "sprelax/io.hpp"

#include "sprelax/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sprelax {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericalError("cannot open output file: " + path);
  return out;
}

} // namespace

void write_invariants_csv(const std::string& path,
                          const std::vector<InvariantRecord>& records) {
  std::ofstream out = open_out(path);
  out << "step,t,D,E,Mx,My,D_err,E_err,M_err,lemma2_res,lemma3_res\n";
  for (const InvariantRecord& r : records) {
    out << r.n << ',' << fmt17(r.t) << ',' << fmt17(r.D) << ',' << fmt17(r.E) << ','
        << fmt17(r.Mx) << ',' << fmt17(r.My) << ',' << fmt17(r.D_err) << ','
        << fmt17(r.E_err) << ',' << fmt17(r.M_err) << ',' << fmt17(r.lemma2_res) << ','
        << fmt17(r.lemma3_res) << '\n';
  }
  if (!out) throw NumericalError("write failed: " + path);
}

std::vector<InvariantRecord> read_invariants_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NumericalError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw NumericalError("empty invariants file: " + path);
  std::vector<InvariantRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::vector<std::string> cells;
    while (std::getline(ss, item, ',')) cells.push_back(item);
    if (cells.size() != 11) throw NumericalError("malformed invariants row: " + line);
    InvariantRecord r;
    r.n = std::stoi(cells[0]);
    r.t = std::stod(cells[1]);
    r.D = std::stod(cells[2]);
    r.E = std::stod(cells[3]);
    r.Mx = std::stod(cells[4]);
    r.My = std::stod(cells[5]);
    r.D_err = std::stod(cells[6]);
    r.E_err = std::stod(cells[7]);
    r.M_err = std::stod(cells[8]);
    r.lemma2_res = std::stod(cells[9]);
    r.lemma3_res = std::stod(cells[10]);
    out.push_back(r);
  }
  return out;
}

void write_snapshot(const std::string& path, const Grid& grid, const SchemeState& state,
                    const DensityFrame* filtered) {
  const bool periodic = grid.bc == BcKind::Periodic;
  const int nxs = periodic ? grid.nx : grid.nx + 1;
  const int nys = periodic ? grid.ny : grid.ny + 1;
  const int lx = grid.nx * grid.r, ly = grid.ny * grid.r;

  auto vertex_dof = [&](int ix, int iy) -> std::int64_t {
    const int gx = ix * grid.r, gy = iy * grid.r;
    if (periodic)
      return static_cast<std::int64_t>(gy % ly) * lx + (gx % lx);
    if (gx == 0 || gx == lx || gy == 0 || gy == ly) return -1;
    return static_cast<std::int64_t>(gy - 1) * (lx - 1) + (gx - 1);
  };

  std::ofstream out = open_out(path);
  out << "# sprelax snapshot\n";
  out << "nx_samples = " << nxs << "\n";
  out << "ny_samples = " << nys << "\n";
  out << "xmin = " << fmt17(grid.domain.xmin) << "\n";
  out << "xmax = " << fmt17(grid.domain.xmax) << "\n";
  out << "ymin = " << fmt17(grid.domain.ymin) << "\n";
  out << "ymax = " << fmt17(grid.domain.ymax) << "\n";
  out << "t = " << fmt17(state.t) << "\n";
  out << "fields = re_u im_u density v" << (filtered ? " density_filtered" : "") << "\n";
  for (int iy = 0; iy < nys; ++iy)
    for (int ix = 0; ix < nxs; ++ix) {
      const std::int64_t d = vertex_dof(ix, iy);
      const cplx u = d >= 0 ? state.U.coeffs[static_cast<std::size_t>(d)] : cplx(0.0);
      const double v = d >= 0 ? state.V_node.coeffs[static_cast<std::size_t>(d)] : 0.0;
      out << fmt17(u.real()) << ' ' << fmt17(u.imag()) << ' ' << fmt17(std::norm(u)) << ' '
          << fmt17(v);
      if (filtered) {
        const double fv = (periodic && !filtered->filtered.empty())
                              ? filtered->filtered[static_cast<std::size_t>(iy) * nxs + ix]
                              : 0.0;
        out << ' ' << fmt17(fv);
      }
      out << '\n';
    }
  if (!out) throw NumericalError("write failed: " + path);
}

void write_eoc_csv(const std::string& path, const std::vector<EocRow>& rows) {
  std::ofstream out = open_out(path);
  out << "resolution,err_u,rate_u,err_v,rate_v\n";
  for (const EocRow& r : rows) {
    out << fmt17(r.resolution) << ',' << fmt17(r.err_u) << ','
        << (r.has_rate ? fmt17(r.rate_u) : "nan") << ',' << fmt17(r.err_v) << ','
        << (r.has_rate ? fmt17(r.rate_v) : "nan") << '\n';
  }
  if (!out) throw NumericalError("write failed: " + path);
}

std::string format_eoc_table(const std::vector<EocRow>& rows, const std::string& res_label) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %-14s %-8s %-14s %-8s\n", res_label.c_str(), "e(u)",
                "rate", "e(v)", "rate");
  out << buf;
  for (const EocRow& r : rows) {
    if (r.has_rate)
      std::snprintf(buf, sizeof(buf), "%-12.6g %-14.6e %-8.3f %-14.6e %-8.3f\n", r.resolution,
                    r.err_u, r.rate_u, r.err_v, r.rate_v);
    else
      std::snprintf(buf, sizeof(buf), "%-12.6g %-14.6e %-8s %-14.6e %-8s\n", r.resolution,
                    r.err_u, "-", r.err_v, "-");
    out << buf;
  }
  return out.str();
}

} // namespace sprelax
