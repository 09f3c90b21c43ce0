#pragma once

#include "gsm/types.hpp"

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gsm {

// Triangle mesh with an optional UV atlas. UV topology is independent of the
// vertex topology (seams duplicate UV vertices), so uv_faces indexes uvs and
// has one entry per face when UVs are present.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec2> uvs;
  std::vector<std::array<int, 3>> uv_faces;

  bool has_uvs() const { return !uv_faces.empty(); }
  void validate() const;  // throws on index out of range or NaN coordinates
};

struct Joint {
  std::string name;
  int parent = -1;  // -1 for the root
  Vec3 rest = Vec3::Zero();
};

// Weighted influence of one joint on a vertex.
struct VertexWeight {
  int joint = 0;
  double weight = 0.0;
};

// Rigged template: mesh + skeleton + sparse skinning weights + optional shape
// displacement basis (one column per shape coefficient) + named joint groups.
struct RigBundle {
  Mesh mesh;
  std::vector<Joint> joints;
  std::vector<std::vector<VertexWeight>> weights;  // per vertex
  std::vector<std::vector<Vec3>> shape_basis;      // [coeff][vertex]
  std::map<std::string, std::vector<int>> parts;

  // Throws on invariant violations; renormalizes weight sums within
  // `weight_tolerance` of 1 and rejects anything farther off.
  void validate_and_normalize(double weight_tolerance = 1e-3);
};

// N topologically identical layers spanning the shell volume, innermost first.
struct ShellStack {
  std::vector<Mesh> shells;
  int base_index = 0;  // layer closest to the template, from inside
  double adjacent_offset = 0.0;

  int count() const { return static_cast<int>(shells.size()); }
};

// 1-ring neighborhoods; throws if any vertex has no neighbor.
std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh);

// Area-weighted average of incident face normals, normalized per vertex.
std::vector<Vec3> vertex_normals(const Mesh& mesh);

// Uniform (umbrella) Laplacian smoothing: each iteration moves every vertex by
// factor * (neighbor centroid - vertex). Negative factor inflates, positive
// deflates. |factor| >= 1 is rejected as unstable.
Mesh laplacian_offset(const Mesh& mesh, double factor, int iterations);

// Builds boundary layers by iterated Laplacian offsets until the mean
// displacement along rest normals reaches +/-(n_shells-1)/2 * adjacent_offset,
// then linearly interpolates the intermediate layers per vertex.
ShellStack build_shell_stack(const RigBundle& rig, int n_shells,
                             double adjacent_offset);

struct ShellSeparationReport {
  struct PairStats {
    double min_gap = 0.0;          // most negative-prone per-vertex gap
    int min_gap_vertex = -1;
    std::vector<int> inverted;     // vertices where the outer layer dips inside
  };
  std::vector<PairStats> pairs;    // one per adjacent shell pair

  int flagged_count() const;
  std::string to_text() const;
};

// Pure diagnostic: per adjacent pair, signed per-vertex gap along the base
// layer's normals; flags vertices whose ordering inverts.
ShellSeparationReport check_shell_separation(const ShellStack& stack);

namespace detail {
// Shared helper: measures mean signed displacement along fixed normals.
double mean_normal_displacement(const std::vector<Vec3>& from,
                                const std::vector<Vec3>& to,
                                const std::vector<Vec3>& normals);
}  // namespace detail

}  // namespace gsm
