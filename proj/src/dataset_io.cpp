#include "multicoap/dataset_io.hpp"

#include <string>
#include <system_error>

#include "multicoap/csv.hpp"
#include "multicoap/error.hpp"

namespace multicoap::io {

namespace fs = std::filesystem;

namespace {

fs::path indexed(const fs::path& dir, const std::string& stem, std::size_t s, const std::string& suffix = "") {
  return dir / (stem + "_" + std::to_string(s + 1) + suffix + ".csv");
}

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError(DataErrorKind::Io, "cannot create directory " + dir.string() +
                                           (ec ? ": " + ec.message() : std::string()));
  }
}

void write_dataset(const fs::path& dir, const MultiStudyDataset& data) {
  ensure_directory(dir);
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const StudyData& st = data.study(s);
    csv::write_counts(indexed(dir, "X", s), st.X, csv::numbered_header("v", data.p()));
    csv::write_matrix(indexed(dir, "Z", s), st.Z, csv::numbered_header("z", data.d()));
    csv::write_vector(indexed(dir, "a", s), st.a, "a");
  }
}

MultiStudyDataset read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(DataErrorKind::Io, "data directory " + dir.string() + " does not exist");
  std::vector<StudyData> studies;
  for (std::size_t s = 0; fs::exists(indexed(dir, "X", s)); ++s) {
    StudyData st;
    st.X = csv::read_counts(indexed(dir, "X", s));
    const fs::path z_path = indexed(dir, "Z", s);
    if (!fs::exists(z_path)) throw DataError(DataErrorKind::Io, "missing covariate file " + z_path.string());
    st.Z = csv::read_matrix(z_path);
    const fs::path a_path = indexed(dir, "a", s);
    st.a = fs::exists(a_path) ? csv::read_vector(a_path) : Vector::Ones(st.X.rows());
    studies.push_back(std::move(st));
  }
  if (studies.empty()) throw DataError(DataErrorKind::Io, "no X_1.csv in " + dir.string());
  return MultiStudyDataset(std::move(studies));
}

void write_truth(const fs::path& dir, const SimTruth& truth) {
  const fs::path t = dir / "truth";
  ensure_directory(t);
  csv::write_matrix(t / "beta0.csv", truth.beta0, csv::numbered_header("z", truth.beta0.cols()));
  csv::write_matrix(t / "A0.csv", truth.A0, csv::numbered_header("f", truth.A0.cols()));
  for (std::size_t s = 0; s < truth.B0.size(); ++s) {
    csv::write_matrix(indexed(t, "B", s, "0"), truth.B0[s], csv::numbered_header("h", truth.B0[s].cols()));
    csv::write_matrix(indexed(t, "F", s), truth.F[s], csv::numbered_header("f", truth.F[s].cols()));
    csv::write_matrix(indexed(t, "H", s), truth.H[s], csv::numbered_header("h", truth.H[s].cols()));
  }
}

std::optional<SimTruth> read_truth(const fs::path& dir) {
  const fs::path t = dir / "truth";
  if (!fs::is_directory(t)) return std::nullopt;
  SimTruth truth;
  truth.beta0 = csv::read_matrix(t / "beta0.csv");
  truth.A0 = csv::read_matrix(t / "A0.csv");
  for (std::size_t s = 0; fs::exists(indexed(t, "B", s, "0")); ++s) {
    truth.B0.push_back(csv::read_matrix(indexed(t, "B", s, "0")));
    truth.F.push_back(csv::read_matrix(indexed(t, "F", s)));
    truth.H.push_back(csv::read_matrix(indexed(t, "H", s)));
  }
  return truth;
}

void write_params(const fs::path& dir, const ModelParams& theta, const VariationalParams& xi) {
  ensure_directory(dir);
  csv::write_matrix(dir / "beta.csv", theta.beta, csv::numbered_header("z", theta.beta.cols()));
  csv::write_matrix(dir / "A.csv", theta.A, csv::numbered_header("f", theta.q()));
  csv::write_vector(dir / "lambda.csv", theta.lambda, "lambda");
  for (std::size_t s = 0; s < theta.B.size(); ++s) {
    const auto f = csv::numbered_header("f", theta.q());
    const auto h = csv::numbered_header("h", theta.qs(s));
    const auto v = csv::numbered_header("v", theta.A.rows());
    const StudyPosterior& post = xi.studies.at(s);
    csv::write_matrix(indexed(dir, "B", s), theta.B[s], h);
    csv::write_matrix(indexed(dir, "Mf", s), post.Mf, f);
    csv::write_matrix(indexed(dir, "Sf", s), post.Sf, f);
    csv::write_matrix(indexed(dir, "Mh", s), post.Mh, h);
    csv::write_matrix(indexed(dir, "Sh", s), post.Sh, h);
    csv::write_matrix(indexed(dir, "M", s), post.M, v);
    csv::write_matrix(indexed(dir, "V", s), post.V, v);
  }
}

void write_fit(const fs::path& dir, const FitResult& fit) {
  write_params(dir, fit.params, fit.vparams);
  Vector trace = Eigen::Map<const Vector>(fit.elbo_trace.data(), static_cast<Index>(fit.elbo_trace.size()));
  csv::write_vector(dir / "elbo_trace.csv", trace, "elbo");
}

std::pair<ModelParams, VariationalParams> read_params(const fs::path& dir) {
  ModelParams theta;
  VariationalParams xi;
  theta.beta = csv::read_matrix(dir / "beta.csv");
  theta.A = csv::read_matrix(dir / "A.csv");
  theta.lambda = csv::read_vector(dir / "lambda.csv");
  for (std::size_t s = 0; s < static_cast<std::size_t>(theta.lambda.size()); ++s) {
    theta.B.push_back(csv::read_matrix(indexed(dir, "B", s)));
    StudyPosterior post;
    post.Mf = csv::read_matrix(indexed(dir, "Mf", s));
    post.Sf = csv::read_matrix(indexed(dir, "Sf", s));
    post.Mh = csv::read_matrix(indexed(dir, "Mh", s));
    post.Sh = csv::read_matrix(indexed(dir, "Sh", s));
    post.M = csv::read_matrix(indexed(dir, "M", s));
    post.V = csv::read_matrix(indexed(dir, "V", s));
    xi.studies.push_back(std::move(post));
  }
  return {std::move(theta), std::move(xi)};
}

}  // namespace multicoap::io
