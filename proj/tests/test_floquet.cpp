#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "tshift/floquet.hpp"
#include "tshift/random.hpp"

using namespace tshift;

namespace {

MatrixFunction paper_coefficient(const ShiftSystemPtr& sys) {
  // A(t) = (1/t) I_2, delta-periodic with period 2 on {2^n}
  return {sys, 2,
          [](double t) {
            return Eigen::MatrixXd((1.0 / t) * Eigen::MatrixXd::Identity(2, 2));
          },
          2.0};
}

// distance of lambda from the closed negative real axis
double cut_distance(const std::complex<double>& z) {
  return z.real() <= 0.0 ? std::abs(z.imag()) : std::abs(z);
}

// random delta-periodic coefficient on the window of (sys, T) whose monodromy
// is safely invertible with a principal logarithm
MatrixFunction random_delta_periodic(const ShiftSystemPtr& sys, double T, int n,
                                     Rng& rng) {
  for (;;) {
    std::vector<Eigen::MatrixXd> vals;
    for (double w : sys->window_points(T)) {
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-0.45, 0.45) / sys->mu(w);
      vals.push_back(m);
    }
    auto A = MatrixFunction::from_window(sys, T, std::move(vals));
    try {
      const Eigen::MatrixXd M = transition_matrix(A, sys->window_end(T), sys->t0());
      const Eigen::VectorXcd evs = spectrum_of(M);
      bool ok = true;
      for (Eigen::Index i = 0; i < evs.size(); ++i)
        ok = ok && cut_distance(evs(i)) > 0.05 && std::abs(evs(i)) < 20.0;
      if (ok) return A;
    } catch (const NotRegressiveError&) {
    }
  }
}

Eigen::MatrixXd random_diagonalizable_positive(int n, Rng& rng) {
  for (;;) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = rng.uniform(0.2, 3.0);
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) V(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) < 0.05 * sv(0) || sv(n - 1) < 1e-3) continue;
    return V * d.asDiagonal() * V.inverse();
  }
}

}  // namespace

TEST_CASE("transition matrix of the worked example is exactly 2I") {
  auto pow2 = make_power_system(2.0);
  auto A = paper_coefficient(pow2);
  const Eigen::MatrixXd M = transition_matrix(A, pow2->window_end(2.0), 1.0);
  CHECK(M(0, 0) == 2.0);
  CHECK(M(1, 1) == 2.0);
  CHECK(M(0, 1) == 0.0);
  CHECK(M(1, 0) == 0.0);
  CHECK(max_abs(Eigen::MatrixXd(transition_matrix(A, 1.0, 1.0) -
                                Eigen::MatrixXd::Identity(2, 2))) == 0.0);
}

TEST_CASE("constant coefficient on the integers gives powers of I + A") {
  auto z = make_integer_system();
  Eigen::MatrixXd C(2, 2);
  C << 0.5, 0.25, 0.0, -0.5;
  auto A = MatrixFunction::constant(z, C);
  const Eigen::MatrixXd F = Eigen::MatrixXd::Identity(2, 2) + C;
  Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(2, 2);
  for (int k = 0; k <= 6; ++k) {
    const Eigen::MatrixXd got = transition_matrix(A, static_cast<double>(k), 0.0);
    CHECK(max_abs(Eigen::MatrixXd(got - expect)) == 0.0);
    expect = F * expect;
  }
}

TEST_CASE("cocycle and backward inversion") {
  auto pow2 = make_power_system(2.0);
  auto A = paper_coefficient(pow2);
  const Eigen::MatrixXd whole = transition_matrix(A, 16.0, 1.0);
  const Eigen::MatrixXd split =
      transition_matrix(A, 16.0, 4.0) * transition_matrix(A, 4.0, 1.0);
  CHECK(max_abs(Eigen::MatrixXd(whole - split)) == 0.0);

  const Eigen::MatrixXd back = transition_matrix(A, 1.0, 16.0);
  CHECK(max_abs(Eigen::MatrixXd(back * whole - Eigen::MatrixXd::Identity(2, 2))) <
        1e-14);

  SECTION("random coefficients satisfy the cocycle to rounding") {
    Rng rng(7);
    auto z = make_integer_system();
    for (int trial = 0; trial < 8; ++trial) {
      auto B = random_delta_periodic(z, 4.0, 2, rng);
      const Eigen::MatrixXd lhs = transition_matrix(B, 7.0, 0.0);
      const Eigen::MatrixXd rhs =
          transition_matrix(B, 7.0, 3.0) * transition_matrix(B, 3.0, 0.0);
      CHECK(max_abs(Eigen::MatrixXd(lhs - rhs)) < 1e-12);
    }
  }
}

TEST_CASE("transition reports the non-regressive point") {
  auto z = make_integer_system();
  // I + mu A vanishes at t = 2
  auto A = MatrixFunction{
      z, 1,
      [](double t) {
        return Eigen::MatrixXd::Constant(1, 1, t == 2.0 ? -1.0 : 0.0);
      },
      std::nullopt};
  try {
    transition_matrix(A, 5.0, 0.0);
    FAIL("expected NotRegressiveError");
  } catch (const NotRegressiveError& e) {
    CHECK(e.tau == 2.0);
  }
}

TEST_CASE("Peano-Baker series agrees with the product") {
  auto pow2 = make_power_system(2.0);
  auto A = paper_coefficient(pow2);

  SECTION("order zero is the identity") {
    CHECK(max_abs(Eigen::MatrixXd(peano_baker(A, 8.0, 1.0, 0) -
                                  Eigen::MatrixXd::Identity(2, 2))) == 0.0);
  }

  SECTION("one isolated step is I + mu A exactly") {
    const Eigen::MatrixXd series = peano_baker(A, 2.0, 1.0, 3);
    const Eigen::MatrixXd product = transition_matrix(A, 2.0, 1.0);
    CHECK(max_abs(Eigen::MatrixXd(series - product)) == 0.0);
  }

  SECTION("the series terminates at the step count") {
    const Eigen::MatrixXd s2 = peano_baker(A, 4.0, 1.0, 2);
    const Eigen::MatrixXd s9 = peano_baker(A, 4.0, 1.0, 9);
    const Eigen::MatrixXd prod = transition_matrix(A, 4.0, 1.0);
    CHECK(max_abs(Eigen::MatrixXd(s2 - prod)) < 1e-14);
    CHECK(max_abs(Eigen::MatrixXd(s9 - prod)) < 1e-14);
  }

  SECTION("random windows across catalog scales") {
    Rng rng(21);
    std::vector<ShiftSystemPtr> systems = {make_integer_system(),
                                           make_geometric_system(2.0),
                                           make_geometric_system(3.0)};
    for (int trial = 0; trial < 20; ++trial) {
      const auto& sys = systems[static_cast<std::size_t>(trial) % systems.size()];
      const int n = 1 + trial % 3;
      const Index start = rng.uniform_int(-3, 3);
      const Index steps = rng.uniform_int(1, 8);
      const double a = sys->scale().point(start);
      const double b = sys->scale().point(start + steps);
      auto coeff = std::make_shared<std::vector<Eigen::MatrixXd>>();
      for (Index i = 0; i < steps; ++i) {
        Eigen::MatrixXd m(n, n);
        const double mu = sys->scale().mu(sys->scale().point(start + i));
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) m(r, c) = rng.uniform(-0.4, 0.4) / mu;
        coeff->push_back(m);
      }
      auto At = MatrixFunction{
          sys, n,
          [coeff, sys, start](double t) {
            return coeff->at(
                static_cast<std::size_t>(sys->scale().index_of(t) - start));
          },
          std::nullopt};
      const Eigen::MatrixXd prod = transition_matrix(At, b, a);
      const Eigen::MatrixXd series = peano_baker(At, b, a, static_cast<int>(steps));
      CHECK(max_abs(Eigen::MatrixXd(prod - series)) < 1e-12);
    }
  }
}

TEST_CASE("Theta anchors") {
  SECTION("additive scale: Theta(t) = t - t0 regardless of the anchor") {
    for (double t0 : {0.0, 3.0}) {
      auto z = make_integer_system(1.0, 0.0, t0);
      for (double T : {1.0, 2.0, 5.0}) {
        for (double t = t0; t <= t0 + 20.0; t += 1.0) {
          CHECK(theta(*z, T, t) == t - t0);
        }
      }
    }
  }

  SECTION("Theta(t0) = 0 on every catalog scale") {
    std::vector<std::pair<ShiftSystemPtr, double>> cases = {
        {make_integer_system(), 2.0},        {make_geometric_system(2.0), 2.0},
        {make_geometric_system(3.0), 9.0},   {make_sqrt_system(), 1.0},
        {make_signed_squares_system(), 4.0}, {make_power_system(2.0), 4.0},
    };
    for (const auto& [sys, T] : cases) {
      const auto bk = theta_breakdown(*sys, T, sys->t0());
      CHECK(bk.theta == 0.0);
      CHECK(bk.m == 0);
      CHECK(bk.on_orbit);
    }
  }

  SECTION("off-orbit point on {2^n} with T = 4") {
    auto pow2 = make_power_system(2.0);
    const auto bk = theta_breakdown(*pow2, 4.0, 2.0);
    CHECK(bk.m == 1);
    CHECK_FALSE(bk.on_orbit);
    CHECK(bk.G == -2.0);
    CHECK(bk.theta == 2.0);
  }

  SECTION("orbit additivity on geometric scales") {
    const double q = 3.0;
    auto qz = make_geometric_system(q);
    const double first = theta(*qz, q, qz->shift_plus(q, 1.0));
    CHECK(first == q);
    for (long k = 0; k <= 5; ++k) {
      const double t = qz->iterate_shift(q, 1.0, k);
      CHECK(theta(*qz, q, t) == static_cast<double>(k) * first);
    }
  }
}

TEST_CASE("solve_R closed forms") {
  SECTION("identity monodromy gives R = 0") {
    auto qz = make_geometric_system(2.0);
    const Eigen::MatrixXcd R = solve_R(Eigen::MatrixXd::Identity(3, 3), *qz, 2.0, 4.0);
    CHECK(max_abs(R) < 1e-15);
  }

  SECTION("window exponent is 1 on q^Z with T = q") {
    const double q = 3.0;
    auto qz = make_geometric_system(q);
    Eigen::MatrixXd M(2, 2);
    M << 2.0, 1.0, 0.0, 0.5;
    for (double t : {1.0, q, q * q}) {
      const Eigen::MatrixXcd R = solve_R(M, *qz, q, t);
      const Eigen::MatrixXcd expect =
          (M - Eigen::MatrixXd::Identity(2, 2)).cast<std::complex<double>>() /
          ((q - 1.0) * t);
      CHECK(max_abs(Eigen::MatrixXcd(R - expect)) < 1e-13);
    }
  }

  SECTION("doubling monodromy on {2^n} reproduces the example coefficient") {
    auto pow2 = make_power_system(2.0);
    const Eigen::MatrixXd M = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    for (double t : {1.0, 2.0, 4.0}) {
      const Eigen::MatrixXcd R = solve_R(M, *pow2, 2.0, t);
      CHECK(max_abs(Eigen::MatrixXcd(R - Eigen::MatrixXcd::Identity(2, 2) / t)) <
            1e-14);
    }
  }
}

TEST_CASE("exp_R reproduces the monodromy over one period") {
  Rng rng(2025);

  SECTION("single-step window: I + mu R = M^{Theta(sigma(t0))/T}") {
    const double q = 2.0;
    auto qz = make_geometric_system(q);
    const Eigen::MatrixXd M = random_diagonalizable_positive(2, rng);
    MatrixPower mp(M);
    auto R = [&](double t) { return solve_R(mp, *qz, q, t); };
    const Eigen::MatrixXcd one_step = exp_R(*qz, R, qz->window_end(q), 1.0);
    const double e = theta(*qz, q, qz->sigma(1.0)) / q;
    CHECK(max_abs(Eigen::MatrixXcd(one_step - mp.pow(e))) < 1e-12);
  }

  SECTION("multi-step window with fractional powers") {
    auto pow2 = make_power_system(2.0);
    const double T = 4.0;  // window {1, 2}: each step contributes M^{1/2}
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 1 + trial % 3;
      const Eigen::MatrixXd M = random_diagonalizable_positive(n, rng);
      MatrixPower mp(M);
      auto R = [&](double t) { return solve_R(mp, *pow2, T, t); };
      const Eigen::MatrixXcd got = exp_R(*pow2, R, pow2->window_end(T), 1.0);
      CHECK(max_abs(Eigen::MatrixXcd(got - M.cast<std::complex<double>>())) < 1e-10);
    }
  }

  SECTION("zero R gives the identity") {
    auto z = make_integer_system();
    auto R = [](double) { return Eigen::MatrixXcd::Zero(2, 2); };
    CHECK(max_abs(Eigen::MatrixXcd(exp_R(*z, R, 6.0, 0.0) -
                                   Eigen::MatrixXcd::Identity(2, 2))) == 0.0);
  }
}

TEST_CASE("Floquet decomposition") {
  SECTION("worked example: L is the identity on the whole window") {
    auto pow2 = make_power_system(2.0);
    auto A = paper_coefficient(pow2);
    const FloquetData fd = floquet_decompose(A, 2.0);
    CHECK(max_abs(Eigen::MatrixXd(fd.M - 2.0 * Eigen::MatrixXd::Identity(2, 2))) ==
          0.0);
    for (const auto& L : fd.L)
      CHECK(max_abs(Eigen::MatrixXcd(L - Eigen::MatrixXcd::Identity(2, 2))) < 1e-14);
  }

  SECTION("zero coefficient decomposes trivially") {
    auto z = make_integer_system();
    auto A = MatrixFunction::constant(z, Eigen::MatrixXd::Zero(2, 2));
    const FloquetData fd = floquet_decompose(A, 3.0);
    CHECK(max_abs(Eigen::MatrixXd(fd.M - Eigen::MatrixXd::Identity(2, 2))) == 0.0);
    for (const auto& R : fd.R) CHECK(max_abs(R) < 1e-15);
    for (const auto& L : fd.L)
      CHECK(max_abs(Eigen::MatrixXcd(L - Eigen::MatrixXcd::Identity(2, 2))) < 1e-14);
  }

  SECTION("random delta-periodic coefficients satisfy the invariants") {
    Rng rng(11);
    auto qz = make_geometric_system(2.0);
    const double T = 4.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto A = random_delta_periodic(qz, T, 2, rng);
      const FloquetData fd = floquet_decompose(A, T);
      MatrixPower mp(fd.M);

      // e_R closes on the monodromy
      CHECK(max_abs(Eigen::MatrixXcd(fd.e_R.back() -
                                     fd.M.cast<std::complex<double>>())) < 1e-10);
      // L(t0) = I and L returns to itself after one period
      CHECK(max_abs(Eigen::MatrixXcd(fd.L.front() -
                                     Eigen::MatrixXcd::Identity(2, 2))) < 1e-12);
      CHECK(max_abs(Eigen::MatrixXcd(fd.L.back() - fd.L.front())) < 1e-9);

      // Phi = L e_R at every window point
      for (std::size_t j = 0; j < fd.points.size(); ++j) {
        const Eigen::MatrixXd phi = transition_matrix(A, fd.points[j], 1.0);
        CHECK(max_abs(Eigen::MatrixXcd(phi.cast<std::complex<double>>() -
                                       fd.L[j] * fd.e_R[j])) < 1e-9);
      }

      // L extended one window up coincides with L on the window
      auto R = [&](double u) { return solve_R(mp, *qz, T, u); };
      for (std::size_t j = 0; j + 1 < fd.points.size(); ++j) {
        const double ts = qz->shift_plus(T, fd.points[j]);
        const Eigen::MatrixXcd eR_up = exp_R(*qz, R, ts, 1.0);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(eR_up);
        REQUIRE(lu.isInvertible());
        const Eigen::MatrixXcd L_up =
            transition_matrix(A, ts, 1.0).cast<std::complex<double>>() * lu.inverse();
        CHECK(max_abs(Eigen::MatrixXcd(L_up - fd.L[j])) < 1e-9);
      }
    }
  }
}

TEST_CASE("transition matrices of delta-periodic coefficients repeat across windows") {
  Rng rng(13);
  auto qz = make_geometric_system(2.0);
  const double T = 4.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto A = random_delta_periodic(qz, T, 2, rng);
    const double wend = qz->window_end(T);
    for (double t : qz->window_points(T)) {
      const Eigen::MatrixXd base = transition_matrix(A, t, 1.0);
      const Eigen::MatrixXd shifted = transition_matrix(A, qz->shift_plus(T, t), wend);
      CHECK(max_abs(Eigen::MatrixXd(base - shifted)) < 1e-10);
    }
  }

  SECTION("scalar exponential analogue") {
    auto z = make_integer_system();
    const double T = 3.0;
    auto a = MatrixFunction::from_window(
        z, T,
        {Eigen::MatrixXd::Constant(1, 1, 0.25), Eigen::MatrixXd::Constant(1, 1, -0.5),
         Eigen::MatrixXd::Constant(1, 1, 0.125)});
    for (double t : z->window_points(T)) {
      const double base = transition_matrix(a, t, 0.0)(0, 0);
      const double shifted = transition_matrix(a, t + T, T)(0, 0);
      CHECK(base == Catch::Approx(shifted).margin(1e-12));
    }
  }
}

TEST_CASE("eigenvalue-one criterion for homogeneous periodic solutions") {
  SECTION("worked example is noncritical") {
    auto pow2 = make_power_system(2.0);
    auto A = paper_coefficient(pow2);
    const auto hp = periodic_solution_exists_homogeneous(A, 2.0);
    CHECK_FALSE(hp.periodic_solution_exists);
    CHECK(noncritical_check(A, 2.0));
    CHECK(hp.unit_gap == 1.0);  // spectrum is {2, 2}
  }

  SECTION("zero coefficient is critical") {
    auto z = make_integer_system();
    auto A = MatrixFunction::constant(z, Eigen::MatrixXd::Zero(2, 2));
    CHECK(periodic_solution_exists_homogeneous(A, 2.0).periodic_solution_exists);
    CHECK_FALSE(noncritical_check(A, 2.0));
  }

  SECTION("a = -2 with T = 2 on the integers is critical and oscillates") {
    auto z = make_integer_system();
    auto A = MatrixFunction::constant(z, Eigen::MatrixXd::Constant(1, 1, -2.0));
    const auto hp = periodic_solution_exists_homogeneous(A, 2.0);
    CHECK(hp.periodic_solution_exists);
    CHECK(hp.monodromy(0, 0) == 1.0);

    // simulate: x(sigma(t)) = (1 + mu a) x(t) = -x(t), back to x0 after 2 steps
    double x = 1.0;
    for (int k = 0; k < 2; ++k) x = (1.0 + 1.0 * (-2.0)) * x;
    CHECK(x == 1.0);
  }
}

TEST_CASE("matrix power edge cases") {
  SECTION("principal square root of a diagonal matrix") {
    Eigen::MatrixXd D = Eigen::Vector2d(4.0, 9.0).asDiagonal();
    const Eigen::MatrixXcd half = matrix_power(D, 0.5);
    CHECK(half(0, 0).real() == Catch::Approx(2.0));
    CHECK(half(1, 1).real() == Catch::Approx(3.0));
    CHECK(std::abs(half(0, 1)) < 1e-15);
  }

  SECTION("negative real eigenvalues are fine when diagonalizable") {
    Eigen::MatrixXd D = Eigen::Vector2d(-1.0, 2.0).asDiagonal();
    const Eigen::MatrixXcd lg = MatrixPower(D).log();
    CHECK(lg(0, 0).imag() == Catch::Approx(M_PI));  // principal branch
  }

  SECTION("defective matrix on the branch cut is rejected") {
    Eigen::MatrixXd J(2, 2);
    J << -1.0, 1.0, 0.0, -1.0;
    CHECK_THROWS_AS(MatrixPower(J), LogBranchError);
  }

  SECTION("defective matrices off the cut fall back to the Schur route") {
    Eigen::MatrixXd J(2, 2);
    J << 2.0, 1.0, 0.0, 2.0;
    const Eigen::MatrixXcd half = MatrixPower(J).pow(0.5);
    CHECK(max_abs(Eigen::MatrixXcd(half * half - J.cast<std::complex<double>>())) <
          1e-12);
  }

  SECTION("singular matrices are rejected") {
    CHECK_THROWS_AS(MatrixPower(Eigen::MatrixXd::Zero(2, 2)), SingularMatrixError);
  }
}
