#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "beamshift/cli.hpp"
#include "beamshift/config.hpp"
#include "beamshift/csv.hpp"
#include "oracles.hpp"

namespace beamshift {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

template <typename E>
std::string message_of(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

TEST(Config, DefaultsDescribeTheReferenceSetup) {
  const RunConfig c = parse("");
  EXPECT_EQ(c.beam().width_um, 600.0);
  EXPECT_EQ(c.resolved_delta_x_um(), 120.0);
  EXPECT_NEAR(c.device().gamma(), 0.960789439, 1e-9);
  EXPECT_EQ(c.ccd().cols, 1530);
  EXPECT_EQ(c.ccd().rows, 1020);
}

TEST(Config, CommentsBlankLinesAndWhitespace) {
  const RunConfig c = parse("# comment\n\n  device.phi_deg =  33.5 \nsweep.mode=ccd\n");
  EXPECT_EQ(c.phi_deg, 33.5);
  EXPECT_EQ(c.mode, SweepMode::Ccd);
}

TEST(Config, GammaImpliesWidth) {
  const RunConfig c = parse("device.delta_x_um = 120\ndevice.gamma = 0.9\n");
  EXPECT_EQ(c.device().gamma(), 0.9);
  EXPECT_NEAR(c.beam().width_um, 120.0 / std::sqrt(-std::log(0.9)), 1e-9);
}

TEST(Config, ThetaSetsDisplacement) {
  const RunConfig c = parse("geometry.theta_deg = 0.048\n");
  EXPECT_NEAR(c.resolved_delta_x_um(), 120.0, 1e-9);
  EXPECT_THROW(parse("geometry.theta_deg = 3\n").validate(), OutOfLinearRange);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(message_of<ValidationError>("ccd.full_well = 70000\n").find("full_well"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("beam.width_um = -3\n").find("width_um"), std::string::npos);
  EXPECT_NE(message_of<ValidationError>("device.phi_deg = abc\n").find("device.phi_deg"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("bogus.key = 1\n").find("bogus.key"), std::string::npos);
  EXPECT_NE(message_of<ValidationError>("device.phi_deg = 1\ndevice.phi_deg = 2\n").find("phi_deg"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("beam.width_um = 600\ndevice.gamma = 0.9\n").find("gamma"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("device.delta_x_um = 1\ngeometry.theta_deg = 0.1\n")
                .find("theta_deg"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("sweep.beta_start_deg = 50\nsweep.beta_stop_deg = 10\n")
                .find("beta_stop_deg"),
            std::string::npos);
  EXPECT_NE(message_of<ValidationError>("rng.seed = -4\n").find("rng.seed"), std::string::npos);
  EXPECT_NE(message_of<ValidationError>("sweep.mode = fast\n").find("sweep.mode"), std::string::npos);
  EXPECT_NE(message_of<ValidationError>("profile.points = 100\n").find("profile.points"),
            std::string::npos);
}

TEST(Config, WriteParseRoundTripIsLossless) {
  RunConfig c;
  c.width_um = 1.0 / 3.0 * 1000.0;
  c.delta_x_um = 0.1 + 0.2;
  c.phi_deg = 54.000000000000007;
  c.profile_betas_deg = {1.0 / 7.0, 45.0};
  c.seed = 18446744073709551615ULL;
  c.background = Background::None;
  c.joint_fit = true;
  c.output_path = "out dir/sweep.csv";
  std::stringstream ss;
  write_config(c, ss);
  EXPECT_EQ(parse_config(ss), c);
}

TEST(SweepCsv, WriteReadRoundTrip) {
  const auto dev = DisplacerState::from_overlap(120.0, 0.96, Angle::degrees(54.0));
  const auto rows = analytic_sweep(dev, beta_grid(0.0, 90.0, 10.0));
  std::stringstream ss;
  write_sweep_csv(ss, rows);
  const auto recs = read_sweep_csv(ss);
  ASSERT_EQ(recs.size(), rows.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].beta_deg, rows[i].beta_deg);
    EXPECT_NEAR(recs[i].centroid_um, rows[i].centroid_um, 1e-8 * 120.0);
    ASSERT_TRUE(recs[i].loss_db.has_value());
    EXPECT_NEAR(*recs[i].loss_db, rows[i].loss_db, 1e-8);
  }
}

TEST(SweepCsv, MinimalColumnsAndEmptyLoss) {
  std::istringstream three("beta_deg,centroid_um,centroid_sigma_um\n10,5,9\n20,4,9\n");
  EXPECT_EQ(read_sweep_csv(three).size(), 2u);
  std::istringstream four("beta_deg,centroid_um,centroid_sigma_um,loss_db\n10,5,9,\n20,4,9,1.5\n");
  const auto r = read_sweep_csv(four);
  EXPECT_FALSE(r[0].loss_db.has_value());
  EXPECT_EQ(r[1].loss_db.value(), 1.5);
}

TEST(SweepCsv, SchemaErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_sweep_csv(in);
    } catch (const SchemaError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("beta,centroid_um,centroid_sigma_um\n"), 1u);
  EXPECT_EQ(line_of("beta_deg,centroid_um\n"), 1u);
  EXPECT_EQ(line_of("beta_deg,centroid_um,centroid_sigma_um\n1,2,3\n4,x,9\n"), 3u);
  EXPECT_EQ(line_of("beta_deg,centroid_um,centroid_sigma_um\n1,2,3\n\n4,5\n"), 4u);
  EXPECT_EQ(line_of("beta_deg,centroid_um,centroid_sigma_um\n1,2,0\n"), 2u);
}

TEST(ProfileCsv, ReintegratedPowerMatchesLoss) {
  RunConfig cfg;
  cfg.profile_betas_deg = {10.0, 30.0, 45.0, 60.0, 80.0};
  cfg.profile_points = 4097;
  std::stringstream ss;
  write_profile_csv(ss, cli::profile_curves(cfg));
  const auto curves = read_profile_csv(ss);
  ASSERT_EQ(curves.size(), 5u);
  const double w = cfg.beam().width_um;
  // Input beam exp(-x^2/w^2) over [-4w, 4w]: w sqrt(pi) erf(4).
  const double input = w * std::sqrt(std::numbers::pi) * std::erf(4.0);
  for (const auto& c : curves) {
    const auto& s = c.samples;
    ASSERT_EQ(s.size(), 4097u);
    double power = 0.0;
    const double h = (s.back().x_um - s.front().x_um) / static_cast<double>(s.size() - 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double wt = (i == 0 || i + 1 == s.size()) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      power += wt * s[i].intensity;
    }
    power *= h / 3.0;
    const double expected = transmitted_fraction(cfg.device(), {Angle::degrees(c.beta_deg)});
    EXPECT_NEAR(power / input, expected, 1e-6) << c.beta_deg;
  }
}

TEST(ProfileCsv, RejectsBadHeader) {
  std::istringstream in("beta,x,i\n");
  EXPECT_THROW(read_profile_csv(in), SchemaError);
}

TEST(Golden, InPhaseSweepIsByteIdentical) {
  const std::string dir = BEAMSHIFT_TEST_DATA_DIR;
  std::ifstream conf(dir + "/in_phase.conf");
  ASSERT_TRUE(conf);
  const RunConfig cfg = parse_config(conf);
  std::ostringstream a;
  std::ostringstream b;
  write_sweep_csv(a, cli::run_sweep(cfg));
  write_sweep_csv(b, cli::run_sweep(cfg));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), slurp(dir + "/sweep_in_phase.csv"));
}

TEST(Golden, NoisyCcdSweepIsReproducible) {
  RunConfig cfg;
  cfg.mode = SweepMode::Ccd;
  cfg.ccd_cols = 256;
  cfg.ccd_rows = 256;
  cfg.noise_rms = 300.0;
  cfg.seed = 11;
  cfg.beta_step_deg = 30.0;
  std::ostringstream a;
  std::ostringstream b;
  write_sweep_csv(a, cli::run_sweep(cfg));
  write_sweep_csv(b, cli::run_sweep(cfg));
  EXPECT_EQ(a.str(), b.str());
  cfg.seed = 12;
  std::ostringstream c;
  write_sweep_csv(c, cli::run_sweep(cfg));
  EXPECT_NE(a.str(), c.str());
}

}  // namespace
}  // namespace beamshift
