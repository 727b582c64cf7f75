#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "embshift/shift.hpp"

namespace embshift {

struct ForecastConfig {
    int sequence_length = 5;   // l
    int training_length = 7;   // t_tr, slices before the test slice
    int horizon = 1;           // steps ahead
    int hidden_units = 16;
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t rng_seed = 1;
    int test_t = -1;           // held-out target timestamp; -1 = last index

    void validate() const;
};

struct ForecastExample {
    std::vector<double> window;  // length l, oldest first
    double target = 0.0;
};

struct ExampleSets {
    std::vector<ForecastExample> train;
    std::vector<ForecastExample> test;
};

// Sliding windows of length l with target horizon steps ahead. Training
// targets come from the training_length slices preceding the test slice;
// test examples all target test_t. Windows touching an undefined series
// value are skipped. Throws DataError naming the limiting parameter when a
// split comes out empty.
ExampleSets make_examples(const std::map<std::string, ShiftSeries> &series,
                          const ForecastConfig &config);

// Single-layer LSTM over a scalar sequence with a linear readout of the
// final hidden state.
class LstmRegressor {
  public:
    explicit LstmRegressor(int hidden_units);

    int hidden_units() const { return hidden_; }

    void init_random(std::uint64_t seed);

    double forward(std::span<const double> window) const;

    // Adds the gradient of (forward(window) - target)^2 to `grad` (layout of
    // parameters()); returns the squared error.
    double accumulate_gradient(std::span<const double> window, double target,
                               std::vector<double> &grad) const;

    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);
    std::size_t parameter_count() const;

    // Flat text format: one `name rows cols` header per tensor followed by
    // row-major values.
    void save(const std::filesystem::path &path) const;
    static LstmRegressor load(const std::filesystem::path &path);

  private:
    int hidden_;
    // gate order: input, forget, output, candidate
    Eigen::VectorXd w_x_[4];
    Eigen::MatrixXd w_h_[4];
    Eigen::VectorXd bias_[4];
    Eigen::VectorXd readout_;
    double readout_bias_ = 0.0;

    friend LstmRegressor lstm_train(const std::vector<ForecastExample> &,
                                    const ForecastConfig &);
};

// Minimizes MSE with Adam over mini-batches of BPTT gradients. Batch order
// and shuffling are seeded, so training is bit-reproducible. Throws
// NumericalError if the loss goes non-finite.
LstmRegressor lstm_train(const std::vector<ForecastExample> &examples,
                         const ForecastConfig &config);

// Arithmetic mean of the window (the naive next-step estimate).
double baseline_moving_average(std::span<const double> window);

// Mean squared error; throws DataError on length mismatch or empty input.
double evaluate(std::span<const double> predictions,
                std::span<const double> targets);

}  // namespace embshift
