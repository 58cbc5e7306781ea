#include <doctest.h>

#include <sstream>

#include "stobit/io.hpp"

using namespace stobit;

namespace {

CountSeries parse(const std::string& text) {
    std::istringstream in(text);
    return io::parse_count_csv(in);
}

std::size_t error_row(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const io::IngestionError& e) {
        return e.row();
    }
    return 0;
}

}  // namespace

TEST_CASE("count CSV parsing") {
    CHECK(parse("count\n3\n0\n7\n").counts == std::vector<long>{3, 0, 7});
    CHECK(parse("3\n0\n7\n").counts == std::vector<long>{3, 0, 7});
    const CountSeries cov = parse("count,z1\n2,1\n5,0\n");
    CHECK(cov.counts == std::vector<long>{2, 5});
    REQUIRE(cov.covariate_count() == 1);
    CHECK(cov.covariates(0, 0) == 1.0);
    CHECK(cov.covariates(1, 0) == 0.0);
    const CountSeries indexed = parse("t,count,z1\n1,4,0.5\n2,6,-1\n");
    CHECK(indexed.counts == std::vector<long>{4, 6});
    CHECK(indexed.covariates(1, 0) == -1.0);
    CHECK(parse("count\r\n1\r\n2\r\n\n").counts == std::vector<long>{1, 2});
}

TEST_CASE("count CSV errors name the row") {
    CHECK(error_row("count\n-1\n") == 2);
    CHECK(error_row("count\n1\n2.5\n") == 3);
    CHECK(error_row("count\n1\n\n4\n") == 3);
    CHECK(error_row("count,z\n1,2\n3\n") == 3);
    CHECK(error_row("count,z\n1,\n") == 2);
    CHECK(error_row("count\n1\nabc\n") == 3);
    CHECK_THROWS_AS((void)parse("count\n"), io::IngestionError);
    std::istringstream in("count\n2\n9\n");
    CHECK_THROWS_AS((void)io::parse_count_csv(in, 5), io::IngestionError);
}

TEST_CASE("series CSV round trip") {
    Eigen::MatrixXd z(2, 1);
    z << 0.1, 1.0 / 3.0;
    const CountSeries s(std::vector<long>{7, 0}, z);
    std::ostringstream out;
    io::write_series_csv(out, s);
    const CountSeries back = parse(out.str());
    CHECK(back.counts == s.counts);
    CHECK(back.covariates(1, 0) == 1.0 / 3.0);
}

TEST_CASE("fit JSON round trip") {
    FitResult fit;
    fit.method = FitMethod::MleScenario2;
    fit.names = {"alpha0", "alpha1", "delta"};
    fit.estimates = Eigen::Vector3d(7.123456789012345, -0.1 / 3.0, 0.25);
    fit.std_errors = Eigen::Vector3d(0.1, 0.02, 0.05);
    fit.loglik = -1234.5678901234567;
    fit.objective = -fit.loglik;
    fit.aic = 2475.1;
    fit.bic = 2490.2;
    fit.n_effective = 1000;
    fit.hessian_invertible = true;
    fit.converged = true;
    fit.iterations = 42;
    const auto text = io::to_json(fit).dump();
    const FitResult back = io::fit_from_json(nlohmann::json::parse(text));
    CHECK(back.method == fit.method);
    CHECK(back.names == fit.names);
    CHECK(back.estimates == fit.estimates);
    REQUIRE(back.std_errors);
    CHECK(*back.std_errors == *fit.std_errors);
    CHECK(back.loglik == fit.loglik);
    CHECK(back.n_effective == 1000);
    CHECK(back.iterations == 42);

    FitResult cls;
    cls.method = FitMethod::Cls;
    cls.names = {"alpha0"};
    cls.estimates = Eigen::VectorXd::Constant(1, 2.0);
    cls.loglik = std::nan("");
    const FitResult cb = io::fit_from_json(nlohmann::json::parse(io::to_json(cls).dump()));
    CHECK(std::isnan(cb.loglik));
    CHECK_FALSE(cb.std_errors);
}
