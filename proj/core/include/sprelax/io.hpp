#ifndef SPRELAX_IO_HPP
#define SPRELAX_IO_HPP

#include "sprelax/cosmology.hpp"
#include "sprelax/invariants.hpp"
#include "sprelax/stepper.hpp"
#include "sprelax/verification.hpp"

#include <string>
#include <vector>

namespace sprelax {

/// invariants.csv: header row then one row per logged step, every value
/// printed with 17 significant digits so doubles round-trip exactly.
void write_invariants_csv(const std::string& path, const std::vector<InvariantRecord>& records);
std::vector<InvariantRecord> read_invariants_csv(const std::string& path);

/// Field snapshot on the element-vertex lattice. Dirichlet grids include the
/// boundary ring of zeros ((nx+1)(ny+1) samples), periodic grids the nx*ny
/// unique vertices. Records are row-major (x fastest):
/// re_u im_u density v [density_filtered].
void write_snapshot(const std::string& path, const Grid& grid, const SchemeState& state,
                    const DensityFrame* filtered = nullptr);

void write_eoc_csv(const std::string& path, const std::vector<EocRow>& rows);
std::string format_eoc_table(const std::vector<EocRow>& rows, const std::string& res_label);

} // namespace sprelax

#endif
