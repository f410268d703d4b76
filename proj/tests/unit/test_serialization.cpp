#include <doctest.h>

#include <filesystem>

#include "rmtlab/errors.hpp"
#include "rmtlab/serialization.hpp"

using namespace rmtlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rmtlab_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("serialization") {
  TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("ensemble specs round trip") {
    const std::vector<EnsembleSpec> specs{
        EnsembleSpec::goe(10), EnsembleSpec::gue(7),
        EnsembleSpec::wigner(Symmetry::RealSymmetric, EntryLaw::rademacher(), 12),
        EnsembleSpec{Symmetry::ComplexHermitian, EntryLaw::uniform_centered(),
                     build_band_profile(16, 4, VarianceProfile::BandShape::Triangle)},
        EnsembleSpec{Symmetry::RealSymmetric, EntryLaw::gaussian(), VarianceProfile::cosine_modulated(9, 0.2)}};
    for (const auto& s : specs) {
      const auto back = ensemble_from_json(to_json(s));
      CHECK(to_json(back) == to_json(s));
      CHECK(digest(back) == digest(s));
      CHECK(back.profile.matrix().isApprox(s.profile.matrix(), 1e-15));
    }
  }

  TEST_CASE("invalid specs name the field") {
    auto j = to_json(EnsembleSpec::goe(10));
    j["profile"]["n"] = -3;
    try {
      ensemble_from_json(j);
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("profile.n") != std::string::npos);
    }
    j = to_json(EnsembleSpec::goe(10));
    j["symmetry"] = "quaternion";
    CHECK_THROWS_AS(ensemble_from_json(j), ConfigError);
    j = to_json(EnsembleSpec::goe(10));
    j["entry_law"] = {{"name", "cauchy"}};
    CHECK_THROWS_AS(ensemble_from_json(j), ConfigError);
    // An omitted entry law means Gaussian entries.
    j.erase("entry_law");
    CHECK(ensemble_from_json(j).entry_law.kind() == EntryLaw::Kind::Gaussian);
  }

  TEST_CASE("log-gas specs round trip") {
    const LogGasSpec spec{1.0, Potential::quartic(), 200};
    const auto back = loggas_from_json(to_json(spec));
    CHECK(back.beta == 1.0);
    CHECK(back.n == 200);
    CHECK(back.potential.coefficients() == spec.potential.coefficients());
    CHECK(loggas_from_json(Json{{"beta", 2.0}, {"potential", "quadratic"}, {"n", 5}}).potential.coefficients() ==
          Potential::quadratic().coefficients());
    CHECK_THROWS_AS(loggas_from_json(Json{{"beta", -1.0}, {"potential", "quadratic"}, {"n", 5}}), ConfigError);
    CHECK(digest(spec) != digest(LogGasSpec{2.0, Potential::quartic(), 200}));
  }

  TEST_CASE("matrices round trip bit for bit") {
    for (const auto& spec : {EnsembleSpec::goe(9), EnsembleSpec::gue(9)}) {
      const auto h = sample_matrix(spec, 3);
      const auto path = scratch("m.bin");
      write_matrix(path, h);
      const auto back = read_matrix(path);
      REQUIRE(back.index() == h.index());
      if (h.index() == 0)
        CHECK((std::get<0>(back).array() == std::get<0>(h).array()).all());
      else
        CHECK((std::get<1>(back).array() == std::get<1>(h).array()).all());
    }
    const auto bad = scratch("bad.bin");
    write_text(bad, "not a matrix");
    CHECK_THROWS_AS(read_matrix(bad), ConfigError);
  }

  TEST_CASE("spectrum CSV round trip") {
    const auto s = gaussian_spectrum(Symmetry::RealSymmetric, 50, 4);
    const auto path = scratch("s.csv");
    auto tagged = SpectrumSample::from_values(s.eigenvalues, "abc123", 4);
    write_spectrum_csv(path, tagged);
    const auto back = read_spectrum_csv(path);
    CHECK(back.eigenvalues == s.eigenvalues);
    CHECK(back.spec_digest == "abc123");
    CHECK(back.seed == 4);
  }

  TEST_CASE("fundamental solutions round trip") {
    const auto sol = fundamental_solution(frozen_unit_problem(4, 1.0), {0.5, 1.0});
    const auto path = scratch("u.bin");
    write_fundamental_solution(path, sol);
    const auto back = read_fundamental_solution(path);
    CHECK(back.times == sol.times);
    for (std::size_t k = 0; k < sol.u.size(); ++k) CHECK((back.u[k].array() == sol.u[k].array()).all());
  }

  TEST_CASE("trajectory CSV has one row per checkpoint") {
    std::vector<DbmState> states{DbmState{0.0, {-1.0, 1.0}, 1.0, Potential::quadratic()},
                                 DbmState{0.5, {-0.9, 0.8}, 1.0, Potential::quadratic()}};
    const auto path = scratch("t.csv");
    write_trajectory_csv(path, states);
    const auto text = read_text(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("0.5,") != std::string::npos);
  }
}
