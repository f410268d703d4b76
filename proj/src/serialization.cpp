#include "rmtlab/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rmtlab/errors.hpp"

namespace rmtlab {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T field(const Json& j, const char* name, const std::string& context) {
  if (!j.contains(name)) throw ConfigError(context + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(context + ": field '" + name + "' has the wrong type");
  }
}

std::string band_shape_name(VarianceProfile::BandShape s) {
  switch (s) {
    case VarianceProfile::BandShape::Flat: return "flat";
    case VarianceProfile::BandShape::Triangle: return "triangle";
    case VarianceProfile::BandShape::Custom: return "custom";
  }
  return "custom";
}

}  // namespace

Json to_json(const EnsembleSpec& spec) {
  Json law{{"name", spec.entry_law.name()}};
  if (spec.entry_law.kind() == EntryLaw::Kind::Discrete) {
    Json atoms = Json::array();
    for (const auto& a : spec.entry_law.atoms()) atoms.push_back({a.value, a.probability});
    law["atoms"] = atoms;
  }
  const auto& p = spec.profile;
  Json profile{{"n", p.n()}};
  switch (p.kind()) {
    case VarianceProfile::Kind::Constant:
      profile["kind"] = "constant";
      break;
    case VarianceProfile::Kind::Macroscopic:
      profile["kind"] = "macroscopic";
      profile["label"] = p.label();
      profile["parameter"] = p.parameter();
      break;
    case VarianceProfile::Kind::Band:
      profile["kind"] = "band";
      profile["bandwidth"] = p.bandwidth();
      profile["shape"] = band_shape_name(p.band_shape());
      break;
  }
  return Json{{"symmetry", to_string(spec.symmetry)}, {"entry_law", law}, {"profile", profile}};
}

EnsembleSpec ensemble_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("ensemble spec must be an object");
  EnsembleSpec spec;
  spec.symmetry = symmetry_from_string(field<std::string>(j, "symmetry", "ensemble"));

  const Json law = j.contains("entry_law") ? j.at("entry_law") : Json{{"name", "gaussian"}};
  const auto law_name = field<std::string>(law, "name", "entry_law");
  if (law_name == "custom-discrete") {
    std::vector<EntryLaw::Atom> atoms;
    for (const auto& a : field<Json>(law, "atoms", "entry_law")) {
      if (!a.is_array() || a.size() != 2) throw ConfigError("entry_law.atoms: each atom is [value, probability]");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    spec.entry_law = EntryLaw::discrete(std::move(atoms));
  } else {
    spec.entry_law = EntryLaw::from_name(law_name);
  }

  const Json& profile = j.contains("profile") ? j.at("profile") : j;
  const int n = field<int>(profile, "n", "profile");
  if (n < 2) throw ConfigError("profile.n: matrix dimension N must be at least 2 (got " + std::to_string(n) + ")");
  const auto kind = profile.value("kind", std::string("constant"));
  if (kind == "constant") {
    spec.profile = VarianceProfile::constant(n);
  } else if (kind == "macroscopic") {
    const auto label = field<std::string>(profile, "label", "profile");
    if (label != "cosine") throw ConfigError("profile.label: only the 'cosine' macroscopic profile is serializable");
    spec.profile = VarianceProfile::cosine_modulated(n, field<double>(profile, "parameter", "profile"));
  } else if (kind == "band") {
    const auto shape = profile.value("shape", std::string("flat"));
    VarianceProfile::BandShape s;
    if (shape == "flat") s = VarianceProfile::BandShape::Flat;
    else if (shape == "triangle") s = VarianceProfile::BandShape::Triangle;
    else throw ConfigError("profile.shape: unknown band shape '" + shape + "'");
    spec.profile = build_band_profile(n, field<int>(profile, "bandwidth", "profile"), s);
  } else {
    throw ConfigError("profile.kind: unknown profile kind '" + kind + "'");
  }
  return spec;
}

std::string digest(const EnsembleSpec& spec) { return fnv1a_hex(to_json(spec).dump()); }

Json to_json(const LogGasSpec& spec) {
  return Json{{"beta", spec.beta}, {"potential", spec.potential.coefficients()}, {"n", spec.n}};
}

LogGasSpec loggas_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("log-gas spec must be an object");
  LogGasSpec spec;
  spec.beta = field<double>(j, "beta", "loggas");
  spec.n = field<int>(j, "n", "loggas");
  if (j.contains("potential")) {
    const auto& v = j.at("potential");
    if (v.is_string()) {
      const auto name = v.get<std::string>();
      if (name == "quadratic") spec.potential = Potential::quadratic();
      else if (name == "quartic") spec.potential = Potential::quartic();
      else throw ConfigError("loggas.potential: unknown preset '" + name + "'");
    } else {
      spec.potential = Potential(field<std::vector<double>>(j, "potential", "loggas"));
    }
  }
  if (!(spec.beta > 0.0)) throw ConfigError("loggas.beta: must be positive");
  if (spec.n < 1) throw ConfigError("loggas.n: must be at least 1");
  return spec;
}

std::string digest(const LogGasSpec& spec) { return fnv1a_hex(to_json(spec).dump()); }

// ---------------------------------------------------------------------------
// Binary formats

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("truncated " + what);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return is;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const HermitianMatrix& h) {
  auto os = open_out(path, std::ios::binary);
  os.write("RMT1", 4);
  const int n = dimension(h);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(n));
  put<std::uint8_t>(os, symmetry_of(h) == Symmetry::RealSymmetric ? 0 : 1);
  std::visit(
      [&](const auto& m) {
        for (int i = 0; i < n; ++i) {
          for (int j = i; j < n; ++j) {
            const std::complex<double> z = m(i, j);
            put<double>(os, z.real());
            if (symmetry_of(h) == Symmetry::ComplexHermitian) put<double>(os, z.imag());
          }
        }
      },
      h);
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
}

HermitianMatrix read_matrix(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "RMT1", 4) != 0) throw ConfigError("not an RMT1 matrix file");
  const auto n = static_cast<int>(get<std::uint32_t>(is, "matrix header"));
  const auto tag = get<std::uint8_t>(is, "matrix header");
  if (tag == 0) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m(i, j) = m(j, i) = get<double>(is, "matrix body");
    return m;
  }
  if (tag != 1) throw ConfigError("unknown symmetry tag in matrix file");
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double re = get<double>(is, "matrix body");
      const double im = get<double>(is, "matrix body");
      m(i, j) = {re, im};
      m(j, i) = {re, -im};
    }
  }
  return m;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumSample& s) {
  auto os = open_out(path);
  os << "# digest=" << s.spec_digest << " seed=" << s.seed << "\n";
  os << "label,eigenvalue\n" << std::setprecision(17);
  for (int j = 1; j <= s.n(); ++j) os << j << "," << s.label(j) << "\n";
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
}

SpectrumSample read_spectrum_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::string line;
  std::string digest_value;
  std::uint64_t seed = 0;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string token;
      while (ls >> token) {
        if (token.rfind("digest=", 0) == 0) digest_value = token.substr(7);
        else if (token.rfind("seed=", 0) == 0) seed = std::stoull(token.substr(5));
      }
      continue;
    }
    if (line.rfind("label", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed spectrum row '" + line + "'");
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return SpectrumSample::from_values(std::move(values), digest_value, seed);
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<DbmState>& states) {
  auto os = open_out(path);
  os << std::setprecision(17);
  if (!states.empty()) {
    os << "t";
    for (std::size_t k = 1; k <= states.front().positions.size(); ++k) os << ",lambda_" << k;
    os << "\n";
  }
  for (const auto& s : states) {
    os << s.time;
    for (double x : s.positions) os << "," << x;
    os << "\n";
  }
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
}

void write_fundamental_solution(const std::filesystem::path& path, const FundamentalSolution& sol) {
  auto os = open_out(path, std::ios::binary);
  os.write("RMTU", 4);
  const auto dim = sol.u.empty() ? 0u : static_cast<std::uint32_t>(sol.u.front().rows());
  put<std::uint32_t>(os, dim);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sol.u.size()));
  for (std::size_t k = 0; k < sol.u.size(); ++k) {
    put<double>(os, sol.times[k]);
    const auto& u = sol.u[k];
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = 0; j < u.cols(); ++j) put<double>(os, u(i, j));
  }
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
}

FundamentalSolution read_fundamental_solution(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "RMTU", 4) != 0) throw ConfigError("not an RMTU checkpoint file");
  const auto dim = static_cast<Eigen::Index>(get<std::uint32_t>(is, "checkpoint header"));
  const auto count = get<std::uint32_t>(is, "checkpoint header");
  FundamentalSolution sol;
  for (std::uint32_t k = 0; k < count; ++k) {
    sol.times.push_back(get<double>(is, "checkpoint time"));
    Eigen::MatrixXd u(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) u(i, j) = get<double>(is, "checkpoint body");
    sol.u.push_back(std::move(u));
  }
  return sol;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace rmtlab
