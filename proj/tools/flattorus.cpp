// Command-line front end: reduce, filtrate, dist, distortion, lemma-suite,
// generate.  Exit codes: 0 ok, 2 usage or parse error, 3 solver guard
// (dimension or convergence), 4 invariant failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flattorus/embedding.hpp"
#include "flattorus/filtration.hpp"
#include "flattorus/harness.hpp"
#include "flattorus/lattice_io.hpp"
#include "flattorus/lemma_suite.hpp"
#include "flattorus/reduction.hpp"
#include "flattorus/report.hpp"
#include "flattorus/solvers.hpp"

namespace ft = flattorus;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitGuard = 3;
constexpr int kExitInvariant = 4;

struct SpecFlags {
  double alpha = 0.5;
  std::optional<double> gamma;
  std::optional<int> k;
  std::optional<double> p_n;
  double rel_tol = 1e-9;

  ft::EmbeddingSpec spec() const { return ft::EmbeddingSpec{alpha, gamma, k, p_n, rel_tol}; }
};

void add_spec_flags(CLI::App* cmd, SpecFlags& flags) {
  cmd->add_option("--alpha", flags.alpha, "Compression factor in [1/2, 1)")->capture_default_str();
  cmd->add_option("--gamma", flags.gamma, "Filtration growth factor (default 32n)");
  cmd->add_option("--k", flags.k, "Number of Gaussian scales (default ceil(log2 p(n)) + 1)");
  cmd->add_option("--p-n", flags.p_n, "Saturation polynomial value p(n) (default 1024 n^3)");
  cmd->add_option("--rel-tol", flags.rel_tol, "Relative tolerance of theta sums")
      ->capture_default_str();
}

// Writes to the file named by `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ft::InvalidArgument("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw ft::InvalidArgument("failed writing '" + path + "'");
}

ft::Vector parse_point(const std::string& text, int n, const char* name) {
  ft::Vector v = ft::parse_vector(text);
  if (v.size() != n) {
    throw ft::ParseError(std::string(name) + " has " + std::to_string(v.size()) +
                         " coordinates, expected " + std::to_string(n));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-distortion embeddings of flat tori into Hilbert space"};
  app.require_subcommand(1);

  std::string lattice_path;
  std::string output;
  std::string format = "json";
  SpecFlags flags;
  std::size_t pairs = 1000;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool lattice_required) {
    auto* opt = cmd->add_option("lattice", lattice_path, "Lattice file");
    if (lattice_required) opt->required();
    cmd->add_option("-o,--output", output, "Output file (default stdout)");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  };

  std::string method = "kz";
  double delta = ft::kDefaultLllDelta;
  auto* reduce = app.add_subcommand("reduce", "LLL- or KZ-reduce a basis");
  add_common(reduce, true);
  reduce->add_option("--method", method, "Reduction")->check(CLI::IsMember({"lll", "kz"}))
      ->capture_default_str();
  reduce->add_option("--delta", delta, "LLL parameter in (1/4, 1)")->capture_default_str();

  std::optional<double> filtrate_gamma;
  auto* filtrate = app.add_subcommand("filtrate", "Build and validate a (q, gamma)-filtration");
  add_common(filtrate, true);
  filtrate->add_option("--gamma", filtrate_gamma, "Growth factor (default 32n)");

  std::string x_text;
  std::string y_text;
  auto* dist = app.add_subcommand("dist", "Torus distance and its embedded counterparts");
  add_common(dist, true);
  dist->add_option("--x", x_text, "First point, comma or space separated")->required();
  dist->add_option("--y", y_text, "Second point")->required();
  add_spec_flags(dist, flags);
  add_format(dist);

  auto* distortion = app.add_subcommand("distortion", "Measure empirical distortion");
  add_common(distortion, true);
  add_spec_flags(distortion, flags);
  distortion->add_option("--pairs", pairs, "Number of sampled pairs")->capture_default_str();
  distortion->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  add_format(distortion);

  int points = 4;
  int embedding_pairs = 2;
  std::vector<std::string> corpus_files;
  auto* suite = app.add_subcommand("lemma-suite", "Run the property suite");
  suite->add_option("--lattice", corpus_files, "Lattice files (default: built-in corpus)");
  suite->add_option("-o,--output", output, "Output file (default stdout)");
  suite->add_option("--seed", seed, "Seed")->capture_default_str();
  suite->add_option("--points", points, "Random points per lattice")->capture_default_str();
  suite->add_option("--embedding-pairs", embedding_pairs, "Pairs per lattice for full embeddings")
      ->capture_default_str();
  add_spec_flags(suite, flags);
  add_format(suite);

  std::string family = "hypercubic";
  int n = 2;
  int bound = 5;
  double skew = 0.0;
  auto* gen = app.add_subcommand("generate", "Write a lattice from a generator family");
  gen->add_option("--family", family, "hypercubic, random_integer, skewed_diagonal, near_dense_projection")
      ->capture_default_str();
  gen->add_option("--n", n, "Dimension")->capture_default_str();
  gen->add_option("--bound", bound, "Entry bound for random_integer")->capture_default_str();
  gen->add_option("--skew", skew, "Skew exponent for skewed_diagonal")->capture_default_str();
  gen->add_option("--seed", seed, "Seed")->capture_default_str();
  gen->add_option("-o,--output", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const ft::Lattice lattice =
          ft::generate(ft::LatticeFamily{ft::parse_family_kind(family), n, bound, skew, seed});
      std::ostringstream out;
      ft::write_lattice(out, lattice);
      emit(output, out.str());
      return kExitOk;
    }

    if (*suite) {
      ft::SuiteOptions options;
      options.spec = flags.spec();
      options.points = points;
      options.embedding_pairs = embedding_pairs;
      std::vector<ft::CorpusEntry> corpus;
      if (corpus_files.empty()) {
        corpus = ft::default_corpus(seed);
      } else {
        for (const std::string& path : corpus_files) {
          corpus.push_back(ft::CorpusEntry{path, ft::read_lattice_file(path), std::nullopt});
        }
      }
      const ft::LemmaLedger ledger = ft::run_lemma_suite(corpus, seed, options);
      if (format == "csv") {
        std::ostringstream out;
        ft::write_csv(out, ledger);
        emit(output, out.str());
      } else {
        emit(output, ft::dump(ft::to_json(ledger)));
      }
      return ledger.all_passed() ? kExitOk : kExitInvariant;
    }

    const ft::Lattice lattice = ft::read_lattice_file(lattice_path);
    const int dim = lattice.dim();

    if (*reduce) {
      const ft::Lattice reduced =
          method == "lll" ? ft::lll_reduce(lattice, delta) : ft::kz_reduce(lattice);
      std::ostringstream out;
      ft::write_lattice(out, reduced);
      emit(output, out.str());
      return kExitOk;
    }

    if (*filtrate) {
      const double gamma = filtrate_gamma.value_or(ft::default_gamma(dim));
      const ft::BuiltFiltration built = ft::build_filtration(lattice, gamma);
      const ft::FiltrationValidation validation = ft::validate_filtration(built.filtration, built.params);
      emit(output, ft::dump(ft::to_json(built, validation)));
      return validation.valid ? kExitOk : kExitInvariant;
    }

    // Embedding flags are validated before any enumeration starts.
    const ft::ResolvedSpec spec = ft::resolve_spec(flags.spec(), dim);

    if (*dist) {
      const ft::Vector x = parse_point(x_text, dim, "--x");
      const ft::Vector y = parse_point(y_text, dim, "--y");
      const double true_dist = ft::torus_dist(lattice, ft::TorusPoint{x}, ft::TorusPoint{y});
      const ft::ComposedEmbedding embedding(lattice, flags.spec());
      const ft::ComposedValue value = embedding.evaluate(x, y);
      if (format == "csv") {
        std::ostringstream out;
        out << "stage,torus_dist,embedded_dist,lambda1\n";
        for (std::size_t j = 0; j < value.stages.size(); ++j) {
          const ft::StageValue& s = value.stages[j];
          out << j << ',' << ft::format_double(s.torus_dist) << ','
              << ft::format_double(std::sqrt(s.embedded_sq)) << ',' << ft::format_double(s.lambda1)
              << '\n';
        }
        out << "composed," << ft::format_double(true_dist) << ','
            << ft::format_double(std::sqrt(value.total_sq)) << ",\n";
        emit(output, out.str());
      } else {
        ft::Json j;
        j["config"] = ft::to_json(spec);
        j["true_dist"] = ft::number(true_dist);
        ft::Json stages = ft::Json::array();
        for (const ft::StageValue& s : value.stages) {
          stages.push_back(ft::Json{{"torus_dist", ft::number(s.torus_dist)},
                                    {"embedded_dist", ft::number(std::sqrt(s.embedded_sq))},
                                    {"embedded_sq", ft::number(s.embedded_sq)},
                                    {"lambda1", ft::number(s.lambda1)}});
        }
        j["stages"] = stages;
        j["composed_sq"] = ft::number(value.total_sq);
        j["composed_dist"] = ft::number(std::sqrt(value.total_sq));
        emit(output, ft::dump(j));
      }
      return kExitOk;
    }

    if (*distortion) {
      const ft::DistortionReport report =
          ft::run_distortion(lattice, flags.spec(), pairs, seed, lattice_path);
      if (format == "csv") {
        std::ostringstream out;
        ft::write_csv(out, report);
        emit(output, out.str());
      } else {
        emit(output, ft::dump(ft::to_json(report)));
      }
      return kExitOk;
    }
  } catch (const ft::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ft::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ft::DegenerateBasis& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ft::IndexOutOfRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ft::DimensionTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGuard;
  } catch (const ft::NonConvergent& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGuard;
  } catch (const ft::InvariantViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
