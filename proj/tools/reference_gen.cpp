// Generates the frozen reference values used by the test suite.
// Everything here is computed from first principles (grid search and
// quadrature over explicit formulas), independent of the library headers,
// so the numbers it prints can be pinned in tests as oracle values.
//
// Run:  reference_gen            (prints name = value, 17 significant digits)

#include <cmath>
#include <cstdio>
#include <cstdint>

namespace {

// ----- refraction configuration --------------------------------------------
// x = (0,0), y = (1,0), one road {y = 0.1} with speed 10, hop speed eps = 1.
// Travel time as a function of the entry abscissa a and exit abscissa b:
//   f(a,b) = |x - (a,0.1)| / 1 + |a - b| / 10 + |(b,0.1) - y| / 1
// Exhaustive grid search over (a,b) in [-1,2]^2 at resolution 1e-4.

double refraction_time(double a, double b) {
    const double h2 = 0.01;
    return std::sqrt(a * a + h2) + std::fabs(b - a) / 10.0 +
           std::sqrt((1.0 - b) * (1.0 - b) + h2);
}

double refraction_grid_search() {
    const double lo = -1.0, hi = 2.0, step = 1e-4;
    const long n = std::lround((hi - lo) / step);
    double best = 1e300;
    for (long i = 0; i <= n; ++i) {
        const double a = lo + step * static_cast<double>(i);
        for (long j = 0; j <= n; ++j) {
            const double b = lo + step * static_cast<double>(j);
            const double t = refraction_time(a, b);
            if (t < best) best = t;
        }
    }
    return best;
}

// Closed-form cross-check: straight-hop legs meet the road at the critical
// angle with sin(theta) = eps / v = 0.1 (Snell with a flat interface).
double refraction_closed_form() {
    const double h = 0.1, v = 10.0;
    const double sin_t = 1.0 / v;
    const double tan_t = sin_t / std::sqrt(1.0 - sin_t * sin_t);
    const double a = h * tan_t;
    return 2.0 * std::sqrt(a * a + h * h) + (1.0 - 2.0 * a) / v;
}

// ----- two-ball line measure, d = 2 -----------------------------------------
// Invariant line measure normalized so that a ball of radius r has mass 2r:
// mu = (1/pi) dtheta dp with theta in [0,pi), p the signed offset.
// Mass of lines hitting both B((0,0), r) and B((D,0), s):
//   (1/pi) * Int_theta |[-r, r] cap [D cos(theta) - s, D cos(theta) + s]| dtheta
// Substituting u = D cos(theta) turns it into a 1-d integral of a piecewise
// linear overlap against a smooth weight; Simpson on the two smooth halves.

double overlap(double u, double r, double s) {
    const double lo = std::fmax(-r, u - s), hi = std::fmin(r, u + s);
    return std::fmax(0.0, hi - lo);
}

double simpson(double (*f)(double, double, double), double r, double s,
               double a, double b, int n_half) {
    // composite Simpson with 2*n_half intervals
    const double h = (b - a) / (2.0 * n_half);
    double acc = f(a, r, s) + f(b, r, s);
    for (int i = 1; i < 2 * n_half; ++i)
        acc += f(a + h * i, r, s) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double weighted_overlap(double u, double r, double s) {
    const double D = 10.0;
    return overlap(u, r, s) / (D * std::sqrt(1.0 - (u / D) * (u / D)));
}

double two_ball_mass_quadrature() {
    const double r = 0.1, s = 0.1;
    // integrand kink at u = 0; integrate the halves separately
    const double left = simpson(weighted_overlap, r, s, -(r + s), 0.0, 200000);
    const double right = simpson(weighted_overlap, r, s, 0.0, r + s, 200000);
    return (left + right) / M_PI;
}

// ----- multiscale bound regression value ------------------------------------
// d=2, gamma=3, r_k = v_k = 2^-k, n=0, K=2:
//   r_K^(d-1) * v_n^-(gamma-1) * exp[ sum_{k=1..2} r_{k-1}^(d-1) * v_k^-(gamma-1) ]
// = 2^-2 * 1 * exp[ 1*4 + (1/2)*16 ] = 0.25 * exp(12)

double multiscale_example() {
    const double rK = 0.25, vn = 1.0;
    const double sum = 1.0 * 4.0 + 0.5 * 16.0;
    return rK * std::pow(vn, -2.0) * std::exp(sum);
}

}  // namespace

int main() {
    std::printf("refraction_grid_search   = %.17g\n", refraction_grid_search());
    std::printf("refraction_closed_form   = %.17g\n", refraction_closed_form());
    std::printf("two_ball_mass_quadrature = %.17g\n", two_ball_mass_quadrature());
    std::printf("multiscale_example       = %.17g\n", multiscale_example());
    return 0;
}
