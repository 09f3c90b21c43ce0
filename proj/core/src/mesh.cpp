#include "gsm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gsm {

namespace {

void check_face_indices(const std::vector<std::array<int, 3>>& faces,
                        size_t limit, const char* what) {
  for (size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int idx = faces[f][k];
      if (idx < 0 || static_cast<size_t>(idx) >= limit) {
        std::ostringstream msg;
        msg << what << " index out of range at face " << f << " corner " << k
            << " (" << idx << " of " << limit << ")";
        throw std::runtime_error(msg.str());
      }
    }
  }
}

}  // namespace

void Mesh::validate() const {
  check_face_indices(faces, vertices.size(), "vertex");
  if (!uv_faces.empty()) {
    if (uv_faces.size() != faces.size())
      throw std::runtime_error("mesh: uv_faces and faces differ in length");
    check_face_indices(uv_faces, uvs.size(), "uv");
  }
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (!vertices[i].allFinite()) {
      std::ostringstream msg;
      msg << "mesh: non-finite coordinate at vertex " << i;
      throw std::runtime_error(msg.str());
    }
  }
}

void RigBundle::validate_and_normalize(double weight_tolerance) {
  mesh.validate();
  if (mesh.uv_faces.size() != mesh.faces.size())
    throw std::runtime_error("rig: uv_faces and faces differ in length");
  if (weights.size() != mesh.vertices.size())
    throw std::runtime_error("rig: weights must cover every vertex");

  for (size_t j = 0; j < joints.size(); ++j) {
    const int parent = joints[j].parent;
    if (parent >= static_cast<int>(j)) {
      std::ostringstream msg;
      msg << "rig: joint order violated at joint " << j << " (\""
          << joints[j].name << "\"): parent " << parent
          << " does not precede it";
      throw std::runtime_error(msg.str());
    }
    if (parent < -1)
      throw std::runtime_error("rig: negative parent index other than -1");
  }

  for (size_t v = 0; v < weights.size(); ++v) {
    double sum = 0.0;
    for (const auto& w : weights[v]) {
      if (w.joint < 0 || static_cast<size_t>(w.joint) >= joints.size()) {
        std::ostringstream msg;
        msg << "rig: weight joint index out of range at vertex " << v;
        throw std::runtime_error(msg.str());
      }
      if (w.weight < 0.0) {
        std::ostringstream msg;
        msg << "rig: negative skinning weight at vertex " << v;
        throw std::runtime_error(msg.str());
      }
      sum += w.weight;
    }
    if (std::abs(sum - 1.0) > weight_tolerance) {
      std::ostringstream msg;
      msg << "rig: skinning weights at vertex " << v << " sum to " << sum;
      throw std::runtime_error(msg.str());
    }
    if (sum != 1.0 && sum > 0.0) {
      for (auto& w : weights[v]) w.weight /= sum;
    }
  }

  for (const auto& column : shape_basis) {
    if (column.size() != mesh.vertices.size())
      throw std::runtime_error("rig: shape basis column size mismatch");
  }
  for (const auto& [name, joint_list] : parts) {
    for (int j : joint_list) {
      if (j < 0 || static_cast<size_t>(j) >= joints.size()) {
        std::ostringstream msg;
        msg << "rig: part \"" << name << "\" references unknown joint " << j;
        throw std::runtime_error(msg.str());
      }
    }
  }
}

std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh) {
  std::vector<std::set<int>> nb(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      nb[a].insert(b);
      nb[b].insert(a);
    }
  }
  std::vector<std::vector<int>> out(nb.size());
  for (size_t v = 0; v < nb.size(); ++v) {
    if (nb[v].empty()) {
      std::ostringstream msg;
      msg << "mesh: isolated vertex " << v << " has no neighbors";
      throw std::runtime_error(msg.str());
    }
    out[v].assign(nb[v].begin(), nb[v].end());
  }
  return out;
}

std::vector<Vec3> vertex_normals(const Mesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 area_normal = (b - a).cross(c - a);  // |.| = 2 * area
    normals[f[0]] += area_normal;
    normals[f[1]] += area_normal;
    normals[f[2]] += area_normal;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return normals;
}

Mesh laplacian_offset(const Mesh& mesh, double factor, int iterations) {
  if (iterations < 0) throw std::runtime_error("laplacian_offset: negative iteration count");
  if (std::abs(factor) >= 1.0)
    throw std::runtime_error("laplacian_offset: |factor| must be below 1 for stability");
  const auto adjacency = vertex_adjacency(mesh);

  Mesh out = mesh;
  if (factor == 0.0 || iterations == 0) return out;

  std::vector<Vec3> next(out.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (size_t v = 0; v < out.vertices.size(); ++v) {
      Vec3 centroid = Vec3::Zero();
      for (int n : adjacency[v]) centroid += out.vertices[n];
      centroid /= static_cast<double>(adjacency[v].size());
      next[v] = out.vertices[v] + factor * (centroid - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  return out;
}

namespace detail {

double mean_normal_displacement(const std::vector<Vec3>& from,
                                const std::vector<Vec3>& to,
                                const std::vector<Vec3>& normals) {
  double sum = 0.0;
  for (size_t v = 0; v < from.size(); ++v)
    sum += (to[v] - from[v]).dot(normals[v]);
  return sum / static_cast<double>(from.size());
}

}  // namespace detail

namespace {

constexpr double kBoundaryFactor = 0.1;
constexpr int kBoundaryStepBudget = 20000;

// Iterates single Laplacian steps until the mean displacement along the rest
// normals crosses `target`, then blends the last step back onto it exactly.
// `target` > 0 with a negative factor inflates; the deflating case mirrors it.
std::vector<Vec3> offset_boundary(const Mesh& mesh,
                                  const std::vector<Vec3>& normals,
                                  double target) {
  const double sign = target >= 0.0 ? 1.0 : -1.0;
  const double factor = -sign * kBoundaryFactor;
  Mesh current = mesh;
  double disp = 0.0;
  for (int step = 0; step < kBoundaryStepBudget; ++step) {
    Mesh stepped = laplacian_offset(current, factor, 1);
    const double next_disp =
        detail::mean_normal_displacement(mesh.vertices, stepped.vertices, normals);
    if (sign * next_disp >= sign * target) {
      // Partial last step: displacement is affine in the blend parameter.
      const double denom = next_disp - disp;
      const double t = denom == 0.0 ? 1.0 : (target - disp) / denom;
      std::vector<Vec3> out(current.vertices.size());
      for (size_t v = 0; v < out.size(); ++v)
        out[v] = current.vertices[v] +
                 t * (stepped.vertices[v] - current.vertices[v]);
      return out;
    }
    if (sign * next_disp <= sign * disp) {
      std::ostringstream msg;
      msg << "build_shell_stack: boundary offset stalled at displacement "
          << next_disp << " (target " << target << ")";
      throw std::runtime_error(msg.str());
    }
    disp = next_disp;
    current = std::move(stepped);
  }
  std::ostringstream msg;
  msg << "build_shell_stack: boundary offset did not reach " << target
      << " within " << kBoundaryStepBudget << " steps (achieved " << disp << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace

ShellStack build_shell_stack(const RigBundle& rig, int n_shells,
                             double adjacent_offset) {
  if (n_shells < 1) throw std::runtime_error("build_shell_stack: n_shells must be >= 1");
  if (!(adjacent_offset > 0.0))
    throw std::runtime_error("build_shell_stack: adjacent_offset must be positive");

  ShellStack stack;
  stack.adjacent_offset = adjacent_offset;
  if (n_shells == 1) {
    stack.shells = {rig.mesh};
    stack.base_index = 0;
    return stack;
  }

  const auto normals = vertex_normals(rig.mesh);
  const double half_span = 0.5 * (n_shells - 1) * adjacent_offset;
  const std::vector<Vec3> outer = offset_boundary(rig.mesh, normals, half_span);
  const std::vector<Vec3> inner = offset_boundary(rig.mesh, normals, -half_span);

  stack.shells.resize(n_shells);
  for (int k = 0; k < n_shells; ++k) {
    Mesh shell = rig.mesh;
    const double t = static_cast<double>(k) / (n_shells - 1);
    for (size_t v = 0; v < shell.vertices.size(); ++v)
      shell.vertices[v] = (1.0 - t) * inner[v] + t * outer[v];
    stack.shells[k] = std::move(shell);
  }
  stack.base_index = (n_shells - 1) / 2;
  return stack;
}

ShellSeparationReport check_shell_separation(const ShellStack& stack) {
  ShellSeparationReport report;
  if (stack.count() < 2) return report;
  const auto normals = vertex_normals(stack.shells[stack.base_index]);
  report.pairs.resize(stack.count() - 1);
  for (int k = 0; k + 1 < stack.count(); ++k) {
    auto& pair = report.pairs[k];
    pair.min_gap = std::numeric_limits<double>::infinity();
    const auto& lo = stack.shells[k].vertices;
    const auto& hi = stack.shells[k + 1].vertices;
    for (size_t v = 0; v < lo.size(); ++v) {
      const double gap = (hi[v] - lo[v]).dot(normals[v]);
      if (gap < pair.min_gap) {
        pair.min_gap = gap;
        pair.min_gap_vertex = static_cast<int>(v);
      }
      if (gap < 0.0) pair.inverted.push_back(static_cast<int>(v));
    }
  }
  return report;
}

int ShellSeparationReport::flagged_count() const {
  int total = 0;
  for (const auto& pair : pairs) total += static_cast<int>(pair.inverted.size());
  return total;
}

std::string ShellSeparationReport::to_text() const {
  std::ostringstream out;
  out << "shell separation report\n";
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& pair = pairs[k];
    out << "pair " << k << "-" << (k + 1) << ": min gap " << pair.min_gap
        << " at vertex " << pair.min_gap_vertex << ", inverted "
        << pair.inverted.size() << "\n";
  }
  out << "total flagged vertices: " << flagged_count() << "\n";
  return out.str();
}

}  // namespace gsm
