#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "effham/barrier.hpp"
#include "effham/genericity.hpp"
#include "effham/geometry.hpp"
#include "effham/maupertuis.hpp"

namespace effham {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// manifest.json in the output directory: inputs, versions, and a checksum per file.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void input(const std::string& key, nlohmann::json value) { inputs_[key] = std::move(value); }
  /// Registers a file written under the output directory.
  void add(const std::filesystem::path& file);
  const std::vector<std::filesystem::path>& files() const { return files_; }
  nlohmann::json to_json() const;
  void write() const;

 private:
  std::filesystem::path dir_;
  nlohmann::json inputs_ = nlohmann::json::object();
  std::vector<std::filesystem::path> files_;
};

/// V over the unit cell with orbits (reduced mod Z^2) and bump supports.
void write_potential_svg(const std::filesystem::path& path, const Potential& pot,
                         const std::vector<PeriodicOrbit>& orbits = {}, int resolution = 64);

/// Polygons drawn over each other, detected edges thickened, facet classes labelled
/// on the outermost polygon.
void write_levelset_svg(const std::filesystem::path& path, const std::vector<LevelSetPolygon>& polys,
                        const std::vector<EdgeReport>& edges = {});

/// Both orbits on the cover, the argmin geodesic and bump supports over V.
void write_barrier_svg(const std::filesystem::path& path, const Potential& pot, const BarrierReport& rep);

/// Heatmap with bump and extreme orbits; level sets before and after; barrier geodesic.
void write_triptych_svg(const std::filesystem::path& path, const BumpExperiment& ex, const LevelSetPolygon& before,
                        const LevelSetPolygon& after);

}  // namespace effham
