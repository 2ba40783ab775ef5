#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gradnorm/csv.hpp"
#include "gradnorm/errors.hpp"
#include "gradnorm/fd_check.hpp"
#include "gradnorm/problems.hpp"
#include "gradnorm/transport.hpp"
#include "support/support.hpp"

using namespace gradnorm;
using gradnorm::testing::newton_reference;
using gradnorm::testing::random_vector;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("gradnorm_test_" + name);
  std::ofstream(path) << contents;
  return path.string();
}

}  // namespace

// ---------------------------------------------------------------- logistic

TEST(Logistic, GradientAtOrigin) {
  const LogisticDataset data = synthetic_logistic(30, 4, 3);
  auto f = logistic_problem(data);
  Vector expected = Vector::Zero(4);
  for (int i = 0; i < 30; ++i) expected -= data.labels(i) * data.features.row(i).transpose();
  expected /= 2.0 * 30;
  EXPECT_LT((f->gradient(Vector::Zero(4)) - expected).norm(), 1e-14);
  EXPECT_NEAR(f->value(Vector::Zero(4)), std::log(2.0), 1e-15);
}

TEST(Logistic, SingleSample) {
  LogisticDataset data;
  data.labels = Vector::Ones(1);
  data.features = Matrix::Zero(1, 2);
  data.features(0, 0) = 1.0;
  auto f = logistic_problem(data);
  EXPECT_DOUBLE_EQ(f->value(Vector::Zero(2)), std::log(2.0));
  // Far along +e1 the loss vanishes, along -e1 it grows linearly.
  EXPECT_NEAR(f->value(Vector::Constant(2, 40.0)), std::exp(-40.0), 1e-17);
  EXPECT_NEAR(f->value(Vector::Constant(2, -40.0)), 40.0, 1e-12);
}

TEST(Logistic, DeclaredConstants) {
  const LogisticDataset data = synthetic_logistic(20, 3, 5);
  auto f = logistic_problem(data);
  double s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < 20; ++i) {
    const double w = data.features.row(i).norm();
    s2 += w * w;
    s3 += w * w * w;
    s4 += w * w * w * w;
  }
  EXPECT_NEAR(*f->lipschitz(1), s2 / (4 * 20), 1e-12);
  EXPECT_NEAR(*f->lipschitz(2), std::sqrt(3.0) / 18.0 * s3 / 20, 1e-12);
  EXPECT_NEAR(*f->lipschitz(3), s4 / (8 * 20), 1e-12);
}

TEST(Logistic, HessianIsPositiveSemidefinite) {
  auto f = logistic_problem(synthetic_logistic(50, 6, 9));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_vector(rng, 6, 3.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(f->hessian(x));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Logistic, FdCheckOnSynthetic) {
  auto f = logistic_problem(synthetic_logistic(100, 10, 42));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) EXPECT_TRUE(fd_check(*f, random_vector(rng, 10), 3).pass);
}

TEST(Logistic, EmptyAndInvalidData) {
  EXPECT_THROW(logistic_problem(LogisticDataset{}), InputError);
  LogisticDataset bad;
  bad.labels = Vector::Constant(1, 0.5);
  bad.features = Matrix::Ones(1, 1);
  EXPECT_THROW(logistic_problem(bad), InputError);
}

TEST(Synthetic, ShapeAndDeterminism) {
  const LogisticDataset a = synthetic_logistic(100, 10, 42);
  const LogisticDataset b = synthetic_logistic(100, 10, 42);
  EXPECT_EQ(a.samples(), 100);
  EXPECT_EQ(a.features_dim(), 10);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(synthetic_logistic(100, 10, 43).features, a.features);
  EXPECT_THROW(synthetic_logistic(0, 10, 1), InputError);
}

TEST(Synthetic, TrainedModelRecoversPlantedSeparator) {
  const LogisticDataset data = synthetic_logistic(100, 10, 42);
  auto f = logistic_problem(data);
  const Vector x = newton_reference(*f, Vector::Zero(10));
  ASSERT_LT(f->gradient(x).norm(), 1e-10);
  int correct = 0;
  for (int i = 0; i < 100; ++i) correct += data.labels(i) * data.features.row(i).dot(x) > 0;
  EXPECT_GE(correct, 80);
}

// ---------------------------------------------------------------- libsvm

TEST(Libsvm, SingleLine) {
  LibsvmOptions opts;
  opts.features = 3;
  const LogisticDataset d = parse_libsvm("1 1:0.5 3:2\n", opts);
  ASSERT_EQ(d.samples(), 1);
  EXPECT_EQ(d.labels(0), 1.0);
  EXPECT_EQ(d.features.row(0), Eigen::RowVector3d(0.5, 0.0, 2.0));
}

TEST(Libsvm, LabelRemapping) {
  EXPECT_EQ(parse_libsvm("0 1:1\n").labels(0), -1.0);
  const LogisticDataset zero_one = parse_libsvm("0 1:1\n1 2:1\n");
  EXPECT_EQ(zero_one.labels, Eigen::Vector2d(-1, 1));
  const LogisticDataset two_four = parse_libsvm("4 1:1\n2 1:3\n4 2:1\n");
  EXPECT_EQ(two_four.labels, Eigen::Vector3d(1, -1, 1));
  EXPECT_EQ(two_four.features_dim(), 2);
  EXPECT_THROW(parse_libsvm("1 1:1\n2 1:1\n3 1:1\n"), InputError);
}

TEST(Libsvm, CommentsBlankLinesAndNormalization) {
  LibsvmOptions opts;
  opts.normalize_rows = true;
  const LogisticDataset d = parse_libsvm("# header\n\n+1 1:3 2:4\n-1 2:2 # trailing\n", opts);
  ASSERT_EQ(d.samples(), 2);
  EXPECT_NEAR(d.features(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(d.features(0, 1), 0.8, 1e-15);
  EXPECT_NEAR(d.features(1, 1), 1.0, 1e-15);
}

TEST(Libsvm, MalformedLinesReportLineNumber) {
  const std::vector<std::pair<std::string, std::size_t>> cases = {
      {"1 1:1\nabc 1:1\n", 2},
      {"1 1:1\n1 2:1\n-1 2\n", 3},
      {"1 0:1\n", 1},
      {"1 1:x\n", 1},
  };
  for (const auto& [text, line] : cases) {
    try {
      parse_libsvm(text);
      ADD_FAILURE() << "no error for: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
  LibsvmOptions opts;
  opts.features = 2;
  EXPECT_THROW(parse_libsvm("1 3:1\n", opts), ParseError);
}

TEST(Libsvm, EmptyInputAndMissingFile) {
  EXPECT_THROW(parse_libsvm(""), InputError);
  EXPECT_THROW(parse_libsvm("# only a comment\n"), InputError);
  EXPECT_THROW(load_libsvm(temp_file("empty.svm", "")), InputError);
  EXPECT_THROW(load_libsvm("/nonexistent/data.svm"), InputError);
}

TEST(Libsvm, SubsamplingIsSeededAndOrdered) {
  std::string text;
  for (int i = 1; i <= 50; ++i) text += (i % 2 ? "1" : "-1") + std::string(" 1:") + std::to_string(i) + "\n";
  LibsvmOptions opts;
  opts.max_rows = 10;
  opts.seed = 3;
  const LogisticDataset a = parse_libsvm(text, opts);
  const LogisticDataset b = parse_libsvm(text, opts);
  ASSERT_EQ(a.samples(), 10);
  EXPECT_EQ(a.features, b.features);
  for (int i = 1; i < 10; ++i) EXPECT_LT(a.features(i - 1, 0), a.features(i, 0));
}

TEST(Libsvm, LoadFromFile) {
  const LogisticDataset d = load_libsvm(temp_file("small.svm", "1 1:1 2:2\n-1 2:1\n"));
  EXPECT_EQ(d.samples(), 2);
  EXPECT_EQ(d.features_dim(), 2);
}

// ---------------------------------------------------------------- hard family

TEST(HardFamily, Origin) {
  auto f = hard_family_problem({3, 5, 5});
  EXPECT_EQ(f->value(Vector::Zero(5)), 0.0);
  Vector e1 = Vector::Zero(5);
  e1(0) = 1;
  EXPECT_EQ(f->gradient(Vector::Zero(5)), -e1);
}

TEST(HardFamily, TermByTermValue) {
  auto f = hard_family_problem({3, 2, 2});
  const Vector x = Vector::Ones(2);
  EXPECT_EQ(f->apply_A(x), Eigen::Vector2d(0, 1));
  EXPECT_DOUBLE_EQ(f->value(x), -0.75);
}

TEST(HardFamily, OperatorStructure) {
  auto f = hard_family_problem({3, 6, 4});
  const Matrix A = f->A();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      double expected = i == j ? 1.0 : 0.0;
      if (j == i + 1 && i + 1 < 4) expected = -1.0;
      EXPECT_EQ(A(i, j), expected) << i << "," << j;
    }
  }
  std::mt19937_64 rng(4);
  const Vector x = random_vector(rng, 6), u = random_vector(rng, 6);
  EXPECT_LT((f->apply_A(x) - A * x).norm(), 1e-14);
  EXPECT_LT((f->apply_At(u) - A.transpose() * u).norm(), 1e-14);
}

TEST(HardFamily, MinimizerAndDeclaredConstant) {
  for (int p = 1; p <= 3; ++p) {
    const HardFamilySpec s{p, 7, 5};
    auto f = hard_family_problem(s);
    const Vector xs = hard_family_minimizer(s);
    EXPECT_LT(f->gradient(xs).norm(), 1e-12);
    EXPECT_NEAR(f->value(xs), hard_family_optimal_value(s), 1e-12);
    EXPECT_NEAR(hard_family_optimal_value(s), -5.0 * p / (p + 1.0), 1e-15);
    const double norm_A = Eigen::JacobiSVD<Matrix>(f->A()).singularValues()(0);
    EXPECT_LE(gradnorm::testing::factorial(p) * std::pow(norm_A, p + 1), *f->lipschitz(p));
    EXPECT_FALSE(f->lipschitz(p == 3 ? 2 : 3).has_value());
  }
  EXPECT_DOUBLE_EQ(*hard_family_problem({3, 5, 5})->lipschitz(3), 96.0);
}

TEST(HardFamily, FdCheckAwayFromKinks) {
  auto f = hard_family_problem({3, 5, 5});
  std::mt19937_64 rng(6);
  int checked = 0;
  while (checked < 10) {
    const Vector x = random_vector(rng, 5, 2.0);
    if (f->apply_A(x).cwiseAbs().minCoeff() <= 0.1) continue;
    EXPECT_TRUE(fd_check(*f, x, 3).pass);
    ++checked;
  }
}

TEST(HardFamily, MidpointConvexity) {
  auto f = hard_family_problem({3, 6, 6});
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vector x = random_vector(rng, 6, 3.0), y = random_vector(rng, 6, 3.0);
    EXPECT_LE(f->value(0.5 * (x + y)), 0.5 * (f->value(x) + f->value(y)) + 1e-12);
  }
}

TEST(HardFamily, InvalidSpec) {
  EXPECT_THROW(hard_family_problem({3, 5, 6}), InputError);
  EXPECT_THROW(hard_family_problem({3, 5, 1}), InputError);
  EXPECT_THROW(hard_family_problem({4, 5, 5}), InputError);
}

// ---------------------------------------------------------------- quadratic

TEST(Quadratic, ValuesAndConstants) {
  Matrix Q(2, 2);
  Q << 2, 0, 0, 1;
  auto f = quadratic_problem(Q, Eigen::Vector2d(2, 1));
  EXPECT_DOUBLE_EQ(f->value(Eigen::Vector2d(1, 1)), 1.5 - 3.0);
  EXPECT_EQ(f->gradient(Eigen::Vector2d(1, 1)), Eigen::Vector2d(0, 0));
  EXPECT_DOUBLE_EQ(*f->lipschitz(1), 2.0);
  EXPECT_EQ(*f->lipschitz(2), 0.0);
  EXPECT_EQ(*f->lipschitz(3), 0.0);
}

TEST(Quadratic, RandomSpectrum) {
  auto f = random_quadratic(5, 11);
  Eigen::SelfAdjointEigenSolver<Matrix> es(f->Q());
  EXPECT_NEAR(es.eigenvalues().minCoeff(), 0.01, 1e-12);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-12);
  EXPECT_EQ(random_quadratic(5, 11)->Q(), f->Q());
  std::mt19937_64 rng(3);
  EXPECT_TRUE(fd_check(*f, random_vector(rng, 5), 3).pass);
}

TEST(Quadratic, RejectsBadMatrices) {
  Matrix asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(quadratic_problem(asym, Vector::Zero(2)), InputError);
  EXPECT_THROW(quadratic_problem(-Matrix::Identity(2, 2), Vector::Zero(2)), InputError);
  EXPECT_THROW(quadratic_problem(Matrix::Identity(3, 3), Vector::Zero(2)), InputError);
  EXPECT_THROW(random_quadratic(3, 1, 0.0, 1.0), InputError);
}

// ---------------------------------------------------------------- transport dual

namespace {

TransportInstance zero_cost_instance(int n, double gamma) {
  TransportInstance inst;
  inst.cost = Matrix::Zero(n, n);
  inst.source = Vector::Constant(n, 1.0 / n);
  inst.target = Vector::Constant(n, 1.0 / n);
  inst.gamma = gamma;
  return inst;
}

}  // namespace

TEST(OtDual, ZeroCostExample) {
  TransportInstance inst = zero_cost_instance(2, 0.7);
  inst.source = Eigen::Vector2d(0.3, 0.7);
  auto f = ot_dual_problem(inst);
  const Vector lambda = Vector::Zero(4);
  EXPECT_NEAR(f->value(lambda), 0.7 * std::log(4.0), 1e-15);
  const Eigen::Vector4d expected(0.5 - 0.3, 0.5 - 0.7, 0.5 - 0.5, 0.5 - 0.5);
  EXPECT_LT((f->gradient(lambda) - expected).norm(), 1e-15);
}

TEST(OtDual, GradientMatchesConstraintOperator) {
  const TransportInstance inst = random_transport(6, 0.5, 3);
  auto f = ot_dual_problem(inst);
  const Matrix A = constraint_matrix(6);
  const Vector b = constraint_rhs(inst);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Vector lambda = random_vector(rng, 12);
    const Matrix X = f->plan(lambda);
    const Vector vecX = Eigen::Map<const Vector>(X.data(), X.size());
    EXPECT_LT((f->gradient(lambda) - (A * vecX - b)).norm(), 1e-12);
  }
}

TEST(OtDual, ConstraintMatrixLayout) {
  const Matrix A = constraint_matrix(3);
  ASSERT_EQ(A.rows(), 6);
  ASSERT_EQ(A.cols(), 9);
  Matrix X(3, 3);
  X << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Vector vecX = Eigen::Map<const Vector>(X.data(), 9);
  const Vector r = A * vecX;
  EXPECT_EQ(r.head(3), X.rowwise().sum());
  EXPECT_EQ(r.tail(3), X.colwise().sum().transpose());
  // ||A||^2 <= 2n
  EXPECT_LE(Eigen::JacobiSVD<Matrix>(A).singularValues()(0), std::sqrt(6.0) + 1e-12);
}

TEST(OtDual, InvariantDirections) {
  auto f = ot_dual_problem(random_transport(5, 0.5, 8));
  std::mt19937_64 rng(9);
  const Vector lambda = random_vector(rng, 10);
  Vector up = Vector::Zero(10), vp = Vector::Zero(10);
  up.head(5).setOnes();
  vp.tail(5).setOnes();
  EXPECT_NEAR(f->value(lambda + 3.0 * up), f->value(lambda), 1e-12);
  EXPECT_NEAR(f->value(lambda - 2.0 * vp), f->value(lambda), 1e-12);
  EXPECT_LT((f->hessian(lambda) * up).norm(), 1e-12);
  EXPECT_LT((f->hessian(lambda) * vp).norm(), 1e-12);
}

TEST(OtDual, FdCheckAtHalfGamma) {
  auto f = ot_dual_problem(random_transport(4, 0.5, 2));
  std::mt19937_64 rng(10);
  for (int t = 0; t < 5; ++t) EXPECT_TRUE(fd_check(*f, random_vector(rng, 8, 0.5), 3).pass);
}

TEST(OtDual, DeclaredConstants) {
  auto f = ot_dual_problem(random_transport(10, 0.5, 1));
  EXPECT_DOUBLE_EQ(*f->lipschitz(1), 20.0 / 0.5);
  EXPECT_DOUBLE_EQ(*f->lipschitz(2), 4.0 * std::sqrt(2.0) / 0.25);
  EXPECT_DOUBLE_EQ(*f->lipschitz(3), 15.0 * 400.0 / 0.125);
}

TEST(OtDual, InvalidInstances) {
  EXPECT_THROW(ot_dual_problem(zero_cost_instance(3, 0.0)), InputError);
  EXPECT_THROW(ot_dual_problem(zero_cost_instance(3, -1.0)), InputError);
  TransportInstance bad = zero_cost_instance(3, 1.0);
  bad.source(0) += 0.1;
  EXPECT_THROW(ot_dual_problem(bad), InputError);
  bad = zero_cost_instance(3, 1.0);
  bad.cost(0, 1) = 1.0;
  EXPECT_THROW(ot_dual_problem(bad), InputError);
  EXPECT_THROW(random_transport(4, 0.0, 1), InputError);
}

TEST(Smax, ShiftAndStability) {
  std::mt19937_64 rng(12);
  const Vector v = random_vector(rng, 20, 5.0);
  for (double gamma : {0.05, 0.5, 2.0}) {
    EXPECT_NEAR(smax(v.array() + 7.5, gamma), smax(v, gamma) + 7.5, 1e-12);
    EXPECT_NEAR(softargmax(v, gamma).sum(), 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(smax(1e4 * v, gamma)));
    EXPECT_GE(smax(v, gamma), v.maxCoeff());
  }
  EXPECT_NEAR(smax(Vector::Zero(4), 0.5), 0.5 * std::log(4.0), 1e-15);
  EXPECT_THROW(smax(Vector(), 1.0), InputError);
  EXPECT_THROW(softargmax(v, 0.0), InputError);
}

TEST(Transport, RandomInstanceIsValidAndSeeded) {
  const TransportInstance a = random_transport(10, 0.5, 4);
  a.validate();
  EXPECT_EQ(a.size(), 10);
  EXPECT_NEAR(a.source.sum(), 1.0, 1e-12);
  EXPECT_EQ(a.cost, random_transport(10, 0.5, 4).cost);
  EXPECT_EQ(a.cost, a.cost.transpose());
  EXPECT_EQ(a.cost.diagonal().maxCoeff(), 0.0);
}

TEST(Transport, LoadFromCsv) {
  const std::string cost = temp_file("cost.csv", "a,b\n0,1\n1,0\n");
  const std::string src = temp_file("src.csv", "mass\n0.25\n0.75\n");
  const std::string tgt = temp_file("tgt.csv", "mass\n0.5\n0.5\n");
  const TransportInstance inst = load_transport(cost, src, tgt, 0.3);
  EXPECT_EQ(inst.cost(0, 1), 1.0);
  EXPECT_EQ(inst.source(1), 0.75);
  EXPECT_EQ(inst.gamma, 0.3);
  const std::string wide = temp_file("wide.csv", "a,b\n0.5,0.5\n");
  EXPECT_THROW(load_transport(cost, wide, tgt, 0.3), InputError);
  EXPECT_THROW(load_transport("/nonexistent/cost.csv", src, tgt, 0.3), InputError);
}

// ---------------------------------------------------------------- csv

TEST(Csv, ParseAndRoundTrip) {
  const Matrix m = parse_csv_matrix("x,y\n1,2.5\n-3e-2, 4\n");
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(1, 0), -3e-2);
  EXPECT_EQ(m(1, 1), 4.0);

  Matrix r(2, 2);
  r << 0.1, 1.0 / 3.0, -2e-300, 12345.678;
  const std::string path = (std::filesystem::temp_directory_path() / "gradnorm_test_rt.csv").string();
  write_csv_matrix(path, r, {"a", "b"});
  EXPECT_EQ(read_csv_matrix(path), r);
  EXPECT_THROW(write_csv_matrix(path, r, {"a"}), InputError);
}

TEST(Csv, Errors) {
  try {
    parse_csv_matrix("a,b\n1,2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_csv_matrix("a\nfoo\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("a,b\n1,\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("a,b\n"), InputError);
  EXPECT_THROW(read_csv_matrix("/nonexistent.csv"), InputError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -5.0, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}
