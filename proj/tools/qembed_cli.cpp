// qembed: build, audit and inspect embeddings of quotient spaces.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qembed/audit.hpp"
#include "qembed/holonomy.hpp"
#include "qembed/lattice.hpp"
#include "qembed/pipelines.hpp"

using namespace qe;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// vectors given as a list of n-vectors or a flat list of n*n numbers
Mat columns_from_json(const json& j, int n) {
  if (!j.is_array() || j.empty()) throw InputError("basis must be a nonempty array");
  std::vector<Vec> cols;
  if (j[0].is_array()) {
    for (const auto& v : j) cols.push_back(vec_from_json(v));
  } else {
    const Vec flat = vec_from_json(j);
    if (flat.size() % n != 0) throw InputError("flat basis length must be a multiple of n");
    for (int i = 0; i < flat.size() / n; ++i) cols.push_back(flat.segment(i * n, n));
  }
  Mat B(n, static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].size() != n) throw InputError("basis vector has the wrong length");
    B.col(static_cast<int>(i)) = cols[i];
  }
  return B;
}

int cmd_embed(const std::string& space_path, const std::string& method, const std::string& out) {
  const SpacePtr space = construct_space(read_json(space_path));
  const EmbPtr f = embed_auto(space, method);
  write_file(out, serialize_embedding(f, space));
  return 0;
}

int cmd_audit(const std::string& space_path, const std::string& emb_path, std::size_t pairs, std::uint64_t seed,
              const std::string& report) {
  const SpacePtr space = construct_space(read_json(space_path));
  const LoadedEmbedding le = deserialize_embedding(read_file(emb_path));
  if (le.space && le.space->spec().dump() != space->spec().dump())
    throw InputError("embedding was built for a different space");
  DistortionReport r = empirical_distortion(*space, *le.embedding, pairs, seed);
  if (const auto* es = dynamic_cast<const EllipsoidSpace*>(space.get())) r.extras["mesh_error"] = es->mesh_error();
  write_file(report, dump(r.to_json()));
  if (!r.pass) {
    std::cerr << "audit failed: distortion " << r.distortion << " exceeds claimed " << r.claimed << "\n";
    return 2;
  }
  return 0;
}

int cmd_strat(const std::string& lattice_path, double c_n, const std::string& report) {
  const json j = read_json(lattice_path);
  const int n = j.at("n").get<int>();
  if (n < 1 || n > 6) throw InputError("strat: n must lie in 1..6");
  const Mat B = columns_from_json(j.at("basis"), n);
  if (B.cols() != n) throw InputError("strat: basis must have n vectors");
  const StratParams params = c_n > 0 ? StratParams::with_c(n, c_n) : StratParams::for_dimension(n);
  const ShortBasis sb = short_basis(B, params);
  const auto space = make_flat_torus(B);
  const ScaleCheck sc = scale_properties_check(*space, sb, Vec::Zero(n));
  const DiameterBound db = diameter_bound(*space, sb);
  json out = sb.to_json();
  out["scale_check"] = sc.to_json();
  out["analytic_diam"] = db.analytic;
  out["empirical_diam"] = db.empirical;
  out["diameter_pass"] = db.pass;
  out["pass"] = sc.pass && db.pass;
  write_file(report, dump(out));
  if (!sc.pass || !db.pass) {
    std::cerr << "strat: invariant check failed\n";
    return 2;
  }
  return 0;
}

int cmd_decompose(const std::string& path, const std::string& report) {
  const json j = read_json(path);
  const int d = j.at("d").get<int>();
  if (d < 1) throw InputError("decompose: d must be positive");
  std::vector<Mat> mats;
  for (const auto& m : j.at("matrices")) mats.push_back(mat_from_json(m, d, d));
  const CanonicalDecomposition dec = canonical_decomposition(mats);
  json out = dec.to_json();
  const double rec = dec.reconstruction_error(mats), inv = dec.invariance_error(mats);
  out["reconstruction_error"] = rec;
  out["invariance_error"] = inv;
  out["pass"] = rec < 1e-8 && inv < 1e-9;
  write_file(report, dump(out));
  if (!(rec < 1e-8 && inv < 1e-9)) {
    std::cerr << "decompose: reconstruction or invariance check failed\n";
    return 2;
  }
  return 0;
}

int cmd_net(const std::string& space_path, double eps, std::size_t samples, std::uint64_t seed, const std::string& out) {
  if (!(eps > 0)) throw InputError("net: eps must be positive");
  const SpacePtr space = construct_space(read_json(space_path));
  std::vector<Vec> pts;
  double cover = kInf;
  const auto* qs = dynamic_cast<const QuotientSpace*>(space.get());
  if (qs && qs->is_lattice() && static_cast<int>(qs->generators().size()) == qs->dim()) {
    // fine grid, coarsened until it has at most 2e5 points
    double h = eps / 10;
    auto count = [&](double hh) {
      double c = 1;
      for (int i = 0; i < qs->box_matrix().cols(); ++i) c *= std::max(1.0, std::ceil(qs->box_matrix().col(i).norm() / hh));
      return c;
    };
    while (count(h) > 2e5) h *= 1.25;
    pts = qs->grid(h);
    cover = qs->grid_cover(h);
  } else {
    Rng rng(seed);
    for (std::size_t i = 0; i < samples; ++i) pts.push_back(space->sample(rng));
  }
  const Net net = build_net(space, pts, eps);
  json j;
  j["space"] = space->spec();
  j["eps"] = eps;
  j["count"] = net.points.size();
  j["cover_bound"] = std::isfinite(cover) ? json(eps + cover) : json(nullptr);
  j["points"] = json::array();
  for (const auto& p : net.points) j["points"].push_back(vec_to_json(p));
  write_file(out, dump(j));
  return 0;
}

int fail(int code, const char* kind, const std::string& msg, const std::string& witness_path) {
  std::cerr << kind << ": " << msg << "\n";
  if (!witness_path.empty() && witness_path != "-") {
    try {
      write_file(witness_path, dump(json{{"pass", false}, {"error", kind}, {"message", msg}, {"exit_code", code}}));
    } catch (...) {
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-Lipschitz embeddings of quotient spaces"};
  app.require_subcommand(1);

  std::string space, method = "auto", out, emb, report, lattice, holonomy;
  std::size_t pairs = 10000, samples = 20000;
  std::uint64_t seed = 42;
  double eps = 0.1, c_n = 0.0;

  auto* embed = app.add_subcommand("embed", "build an embedding for a space");
  embed->add_option("--space", space, "space spec JSON")->required();
  embed->add_option("--method", method, "auto|doubling|annulus|cone|product|patch");
  embed->add_option("--out", out, "embedding artifact path")->required();

  auto* audit = app.add_subcommand("audit", "audit an embedding on sampled pairs");
  audit->add_option("--space", space, "space spec JSON")->required();
  audit->add_option("--embedding", emb, "embedding artifact")->required();
  audit->add_option("--pairs", pairs, "number of sampled pairs");
  audit->add_option("--seed", seed, "sampler seed");
  audit->add_option("--report", report, "report path")->required();

  auto* strat = app.add_subcommand("strat", "short basis, collapsing scales and diameter bound");
  strat->add_option("--lattice", lattice, "lattice JSON {n, basis}")->required();
  strat->add_option("--c", c_n, "override the constant c_n");
  strat->add_option("--report", report, "report path")->required();

  auto* dec = app.add_subcommand("decompose", "canonical decomposition of commuting orthogonal matrices");
  dec->add_option("--holonomy", holonomy, "JSON {d, matrices}")->required();
  dec->add_option("--report", report, "report path")->required();

  auto* net = app.add_subcommand("net", "greedy eps-net of a space");
  net->add_option("--space", space, "space spec JSON")->required();
  net->add_option("--eps", eps, "net spacing")->required();
  net->add_option("--samples", samples, "samples for spaces without a grid");
  net->add_option("--seed", seed, "sampler seed");
  net->add_option("--out", out, "net output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  const std::string witness = !report.empty() ? report : out;
  try {
    if (*embed) return cmd_embed(space, method, out);
    if (*audit) return cmd_audit(space, emb, pairs, seed, report);
    if (*strat) return cmd_strat(lattice, c_n, report);
    if (*dec) return cmd_decompose(holonomy, report);
    if (*net) return cmd_net(space, eps, samples, seed, out);
  } catch (const InputError& e) {
    return fail(3, "input_error", e.what(), witness);
  } catch (const InvariantError& e) {
    return fail(2, "invariant_failure", e.what(), witness);
  } catch (const std::exception& e) {
    return fail(2, "internal_error", e.what(), witness);
  }
  return 3;
}
