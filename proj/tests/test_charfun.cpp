#include <gtest/gtest.h>

#include <random>

#include "qvjump/charfun.hpp"

using namespace qvjump;

namespace {

cplx rnd(std::mt19937_64& rng, double r)
{
    std::uniform_real_distribution<double> u(-r, r);
    return {u(rng), u(rng)};
}

std::vector<LevyMeasure> families()
{
    return {DiracSum{{{1.0, 0.5}, {0.5, -0.4}}}, Uniform{1.0, -0.5, 0.5}, TruncExp{1.0, 2.0, 0.8}};
}

// E exp(i w X_T + i eta [X]_T) from X_0 = 0 under constant volatility.
cplx joint_cf(const ClosedFormScenario& s, cplx w, cplx e)
{
    const double v = s.sigma_bar * s.sigma_bar;
    return std::exp(s.T * (I * e * v - 0.5 * (w * w + I * w) * v + psi(s.nu, w, e)));
}

} // namespace

TEST(UBranch, Examples)
{
    EXPECT_EQ(u_branch(0.0, 0.0, Branch::Plus), cplx(0.0));
    EXPECT_EQ(u_branch(0.0, 0.0, Branch::Minus), -I);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const cplx w = rnd(rng, 3);
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            const cplx u = u_branch(w, 0.0, b);
            EXPECT_LT(std::min(std::abs(u - w), std::abs(u + I + w)), 1e-12);
        }
    }
}

TEST(UBranch, QuadraticIdentity)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const cplx w = rnd(rng, 5), e = rnd(rng, 5);
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            const cplx u = u_branch(w, e, b);
            EXPECT_LE(std::abs(u * u + I * u - (w * w + I * w - 2.0 * I * e)), 1e-12);
        }
    }
}

TEST(UBranch, NegativeRealRadicandUsesUpperRoot)
{
    // radicand -3/4 arrives with a signed zero imaginary part
    const cplx u = u_branch(1.0, 0.5, Branch::Plus);
    EXPECT_NEAR(u.real(), -std::sqrt(3.0) / 2, 1e-15);
    EXPECT_NEAR(u.imag(), -0.5, 1e-15);
}

TEST(UBranch, NearBranchPointAdvisory)
{
    EXPECT_TRUE(near_branch_point(0.0, cplx(0.0, 0.125)));
    EXPECT_FALSE(near_branch_point(0.0, 0.0));
}

TEST(DuDp, Examples)
{
    EXPECT_LE(std::abs(du_dp(0.0, 0.0) - 1.0), 1e-15);
    const double h = 1e-5;
    const cplx p = 0.3, eta = 0.2;
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const cplx fd = (u_branch(p + h, I * eta, b) - u_branch(p - h, I * eta, b)) / (2 * h);
        EXPECT_LE(std::abs(du_dp(p, eta, b) - fd), 1e-8);
    }
    EXPECT_EQ(du_dp(p, eta, Branch::Minus), -du_dp(p, eta, Branch::Plus));
    EXPECT_THROW(du_dp(0.0, 0.125), Error);
}

TEST(TransferFactor, TrivialCases)
{
    for (const auto& nu : families()) {
        EXPECT_LE(std::abs(transfer_factor(0.0, 0.0, 0.7, 0.3, 0.1, nu, Branch::Plus) - 1.0), 1e-14);
        const cplx w{0.4, -0.2};
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            if (std::abs(u_branch(w, 0.0, b) - w) < 1e-14) {
                EXPECT_LE(std::abs(transfer_factor(w, 0.0, 0.5, 0.2, 0.0, nu, b) - 1.0), 1e-13);
            }
        }
        EXPECT_EQ(a_process(w, 0.3, 0.1, 0.2, 0.05, nu, 0.25, Branch::Minus),
                  transfer_factor(w, 0.3, 0.15, 0.2, 0.05, nu, Branch::Minus));
    }
}

TEST(QClosed, Examples)
{
    const ClosedFormScenario s{0.2, DiracSum{{{1.0, 0.5}}}, 0.25};
    EXPECT_LE(std::abs(q_closed(s, 0.0, 0.1, 0.3) - 1.0), 1e-15);
    EXPECT_LE(std::abs(q_closed(s, -I, 0.1, 0.3) - std::exp(0.3)), 1e-14);
    EXPECT_LE(std::abs(q_closed(s, cplx(1.2, -0.3), 0.25, 0.3) - std::exp(I * cplx(1.2, -0.3) * 0.3)), 1e-15);
}

TEST(RProcess, Examples)
{
    const LevyMeasure nu = Uniform{1.0, -0.5, 0.5};
    EXPECT_LE(std::abs(r_process(0.0, 0.25, 0.0, nu, 0.25) - 1.0), 1e-15);
    EXPECT_LE(std::abs(r_process(-I, 0.1, 0.4, nu, 0.25) - std::exp(-0.4)), 1e-14);
}

TEST(Collar, ValueSymmetry)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.0, 0.25), ux(-1, 1);
    for (const auto& nu : families()) {
        const ClosedFormScenario s{0.2, nu, 0.25};
        for (int i = 0; i < 100; ++i) {
            const cplx q = rnd(rng, 2);
            const double t = ut(rng), x = ux(rng);
            const cplx lhs = r_process(q, t, x, nu, s.T) * q_closed(s, q, t, x);
            const cplx rhs = r_process(-I - q, t, x, nu, s.T) * q_closed(s, -I - q, t, x);
            EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST(JointTransform, ClosedFormIdentityBothBranches)
{
    std::mt19937_64 rng(4);
    for (const auto& nu : families()) {
        const ClosedFormScenario s{0.2, nu, 0.25};
        for (int i = 0; i < 100; ++i) {
            const cplx w = rnd(rng, 2), e = rnd(rng, 2);
            const cplx lhs = joint_cf(s, w, e);
            cplx rhs[2];
            for (Branch b : {Branch::Plus, Branch::Minus}) {
                const cplx u = u_branch(w, e, b);
                rhs[int(b)] = transfer_factor(w, e, s.T, 0.0, 0.0, nu, b) * q_closed(s, u, 0.0, 0.0);
                EXPECT_LE(std::abs(lhs - rhs[int(b)]), 1e-10 * std::max(1.0, std::abs(lhs)));
            }
            EXPECT_LE(std::abs(rhs[0] - rhs[1]), 1e-10 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST(JointTransform, DiracReferenceState)
{
    const ClosedFormScenario s{0.2, DiracSum{{{1.0, 0.5}}}, 0.25};
    const cplx a = transfer_factor(1.0, 0.5, 0.25, 0.0, 0.0, s.nu, Branch::Plus);
    const cplx u = u_branch(1.0, 0.5, Branch::Plus);
    EXPECT_LE(std::abs(a * q_closed(s, u, 0.0, 0.0) - joint_cf(s, 1.0, 0.5)), 1e-13);
}
