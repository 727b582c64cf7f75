#include "embshift/lstm.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "embshift/errors.hpp"
#include "embshift/rng.hpp"

namespace embshift {

void ForecastConfig::validate() const {
    if (sequence_length < 1) throw ConfigError("sequence_length must be >= 1");
    if (training_length < 1) throw ConfigError("training_length must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

ExampleSets make_examples(const std::map<std::string, ShiftSeries> &series,
                          const ForecastConfig &config) {
    config.validate();
    std::size_t T = 0;
    for (const auto &[_, s] : series) T = std::max(T, s.values.size());
    if (T == 0) throw DataError("make_examples: empty shift series");

    const int l = config.sequence_length;
    const int h = config.horizon;
    const long long test_t = config.test_t < 0 ? static_cast<long long>(T) - 1
                                               : config.test_t;
    if (test_t < l + h - 1)
        throw DataError(
            "make_examples: test timestamp " + std::to_string(test_t) +
            " too early for sequence_length " + std::to_string(l) +
            " and horizon " + std::to_string(h));

    auto window_at = [&](const ShiftSeries &s, long long t,
                         ForecastExample &out) {
        if (!s.defined(static_cast<std::size_t>(t))) return false;
        out.window.resize(l);
        for (int i = 0; i < l; ++i) {
            long long idx = t - h - l + 1 + i;
            if (idx < 0 || !s.defined(static_cast<std::size_t>(idx))) return false;
            out.window[i] = s.values[static_cast<std::size_t>(idx)];
        }
        out.target = s.values[static_cast<std::size_t>(t)];
        return true;
    };

    ExampleSets sets;
    const long long train_lo =
        std::max<long long>(l + h - 1, test_t - config.training_length);
    for (const auto &[node, s] : series) {
        ForecastExample ex;
        for (long long t = train_lo; t < test_t; ++t)
            if (window_at(s, t, ex)) sets.train.push_back(ex);
        if (window_at(s, test_t, ex)) sets.test.push_back(ex);
    }
    if (sets.train.empty())
        throw DataError(
            "make_examples: no training examples; training_length " +
            std::to_string(config.training_length) + " with sequence_length " +
            std::to_string(l) + " leaves no valid windows before t=" +
            std::to_string(test_t));
    if (sets.test.empty())
        throw DataError("make_examples: no test examples at t=" +
                        std::to_string(test_t));
    return sets;
}

LstmRegressor::LstmRegressor(int hidden_units) : hidden_(hidden_units) {
    if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
    for (int g = 0; g < 4; ++g) {
        w_x_[g] = Eigen::VectorXd::Zero(hidden_);
        w_h_[g] = Eigen::MatrixXd::Zero(hidden_, hidden_);
        bias_[g] = Eigen::VectorXd::Zero(hidden_);
    }
    readout_ = Eigen::VectorXd::Zero(hidden_);
}

void LstmRegressor::init_random(std::uint64_t seed) {
    Rng rng(seed ? seed : 1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (int g = 0; g < 4; ++g) {
        for (int i = 0; i < hidden_; ++i) {
            w_x_[g][i] = rng.uniform(-scale, scale);
            for (int j = 0; j < hidden_; ++j)
                w_h_[g](i, j) = rng.uniform(-scale, scale);
            // forget-gate bias starts at 1
            bias_[g][i] = g == 1 ? 1.0 : 0.0;
        }
    }
    for (int i = 0; i < hidden_; ++i) readout_[i] = rng.uniform(-scale, scale);
    readout_bias_ = 0.0;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct StepCache {
    Eigen::VectorXd gate[4];  // i, f, o, g (post-activation)
    Eigen::VectorXd c, h, tanh_c;
};

}  // namespace

double LstmRegressor::forward(std::span<const double> window) const {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden_);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hidden_);
    for (double x : window) {
        Eigen::VectorXd pre[4];
        for (int g = 0; g < 4; ++g)
            pre[g] = w_x_[g] * x + w_h_[g] * h + bias_[g];
        Eigen::VectorXd i = pre[0].unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd f = pre[1].unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd o = pre[2].unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd cand = pre[3].array().tanh();
        c = f.cwiseProduct(c) + i.cwiseProduct(cand);
        h = o.cwiseProduct(c.array().tanh().matrix());
    }
    return readout_.dot(h) + readout_bias_;
}

std::size_t LstmRegressor::parameter_count() const {
    const std::size_t h = static_cast<std::size_t>(hidden_);
    return 4 * (h + h * h + h) + h + 1;
}

std::vector<double> LstmRegressor::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (int g = 0; g < 4; ++g) {
        for (int i = 0; i < hidden_; ++i) out.push_back(w_x_[g][i]);
        for (int i = 0; i < hidden_; ++i)
            for (int j = 0; j < hidden_; ++j) out.push_back(w_h_[g](i, j));
        for (int i = 0; i < hidden_; ++i) out.push_back(bias_[g][i]);
    }
    for (int i = 0; i < hidden_; ++i) out.push_back(readout_[i]);
    out.push_back(readout_bias_);
    return out;
}

void LstmRegressor::set_parameters(std::span<const double> params) {
    if (params.size() != parameter_count())
        throw ConfigError("set_parameters: expected " +
                          std::to_string(parameter_count()) + " values, got " +
                          std::to_string(params.size()));
    std::size_t p = 0;
    for (int g = 0; g < 4; ++g) {
        for (int i = 0; i < hidden_; ++i) w_x_[g][i] = params[p++];
        for (int i = 0; i < hidden_; ++i)
            for (int j = 0; j < hidden_; ++j) w_h_[g](i, j) = params[p++];
        for (int i = 0; i < hidden_; ++i) bias_[g][i] = params[p++];
    }
    for (int i = 0; i < hidden_; ++i) readout_[i] = params[p++];
    readout_bias_ = params[p++];
}

double LstmRegressor::accumulate_gradient(std::span<const double> window,
                                          double target,
                                          std::vector<double> &grad) const {
    if (grad.size() != parameter_count())
        throw ConfigError("accumulate_gradient: gradient buffer size mismatch");
    const std::size_t T = window.size();
    std::vector<StepCache> cache(T);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden_);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hidden_);
    for (std::size_t t = 0; t < T; ++t) {
        Eigen::VectorXd pre[4];
        for (int g = 0; g < 4; ++g)
            pre[g] = w_x_[g] * window[t] + w_h_[g] * h + bias_[g];
        StepCache &s = cache[t];
        s.gate[0] = pre[0].unaryExpr([](double v) { return sigmoid(v); });
        s.gate[1] = pre[1].unaryExpr([](double v) { return sigmoid(v); });
        s.gate[2] = pre[2].unaryExpr([](double v) { return sigmoid(v); });
        s.gate[3] = pre[3].array().tanh();
        c = s.gate[1].cwiseProduct(c) + s.gate[0].cwiseProduct(s.gate[3]);
        s.c = c;
        s.tanh_c = c.array().tanh();
        h = s.gate[2].cwiseProduct(s.tanh_c);
        s.h = h;
    }
    const double y = readout_.dot(h) + readout_bias_;
    const double err = y - target;

    // parameter gradient accumulators
    Eigen::VectorXd g_wx[4], g_bias[4];
    Eigen::MatrixXd g_wh[4];
    for (int g = 0; g < 4; ++g) {
        g_wx[g] = Eigen::VectorXd::Zero(hidden_);
        g_wh[g] = Eigen::MatrixXd::Zero(hidden_, hidden_);
        g_bias[g] = Eigen::VectorXd::Zero(hidden_);
    }

    Eigen::VectorXd dh = 2.0 * err * readout_;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hidden_);
    for (std::size_t t = T; t-- > 0;) {
        const StepCache &s = cache[t];
        const Eigen::VectorXd &i = s.gate[0];
        const Eigen::VectorXd &f = s.gate[1];
        const Eigen::VectorXd &o = s.gate[2];
        const Eigen::VectorXd &cand = s.gate[3];
        Eigen::VectorXd c_prev =
            t == 0 ? Eigen::VectorXd::Zero(hidden_) : cache[t - 1].c;
        Eigen::VectorXd h_prev =
            t == 0 ? Eigen::VectorXd::Zero(hidden_) : cache[t - 1].h;

        dc += dh.cwiseProduct(o).cwiseProduct(
            (1.0 - s.tanh_c.array().square()).matrix());
        Eigen::VectorXd da[4];
        da[2] = dh.cwiseProduct(s.tanh_c)
                    .cwiseProduct(o)
                    .cwiseProduct((Eigen::VectorXd::Ones(hidden_) - o));
        da[0] = dc.cwiseProduct(cand).cwiseProduct(i).cwiseProduct(
            (Eigen::VectorXd::Ones(hidden_) - i));
        da[1] = dc.cwiseProduct(c_prev).cwiseProduct(f).cwiseProduct(
            (Eigen::VectorXd::Ones(hidden_) - f));
        da[3] = dc.cwiseProduct(i).cwiseProduct(
            (1.0 - cand.array().square()).matrix());

        dh = Eigen::VectorXd::Zero(hidden_);
        for (int g = 0; g < 4; ++g) {
            g_wx[g] += da[g] * window[t];
            g_wh[g] += da[g] * h_prev.transpose();
            g_bias[g] += da[g];
            dh += w_h_[g].transpose() * da[g];
        }
        dc = dc.cwiseProduct(f);
    }

    std::size_t p = 0;
    for (int g = 0; g < 4; ++g) {
        for (int gi = 0; gi < hidden_; ++gi) grad[p++] += g_wx[g][gi];
        for (int gi = 0; gi < hidden_; ++gi)
            for (int j = 0; j < hidden_; ++j) grad[p++] += g_wh[g](gi, j);
        for (int gi = 0; gi < hidden_; ++gi) grad[p++] += g_bias[g][gi];
    }
    const Eigen::VectorXd &h_last = cache[T - 1].h;
    for (int gi = 0; gi < hidden_; ++gi) grad[p++] += 2.0 * err * h_last[gi];
    grad[p++] += 2.0 * err;
    return err * err;
}

LstmRegressor lstm_train(const std::vector<ForecastExample> &examples,
                         const ForecastConfig &config) {
    config.validate();
    if (examples.empty()) throw DataError("lstm_train: empty example set");

    LstmRegressor model(config.hidden_units);
    model.init_random(mix_seed(config.rng_seed, 0x4c53'544dULL));
    if (config.epochs == 0) return model;

    const std::size_t P = model.parameter_count();
    std::vector<double> params = model.parameters();
    std::vector<double> m(P, 0.0), v(P, 0.0), grad(P, 0.0);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long step = 0;

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(mix_seed(config.rng_seed, 0xe000ULL + epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);

        double epoch_loss = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t end = std::min(
                order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const auto &ex = examples[order[i]];
                epoch_loss +=
                    model.accumulate_gradient(ex.window, ex.target, grad);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            ++step;
            const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t p = 0; p < P; ++p) {
                double g = grad[p] * inv_batch;
                m[p] = beta1 * m[p] + (1.0 - beta1) * g;
                v[p] = beta2 * v[p] + (1.0 - beta2) * g * g;
                params[p] -= config.learning_rate * (m[p] / bias1) /
                             (std::sqrt(v[p] / bias2) + eps);
            }
            model.set_parameters(params);
        }
        if (!std::isfinite(epoch_loss))
            throw NumericalError(
                "lstm_train: loss diverged at epoch " + std::to_string(epoch) +
                "; try a lower learning rate");
    }
    return model;
}

double baseline_moving_average(std::span<const double> window) {
    if (window.empty()) throw DataError("baseline_moving_average: empty window");
    double s = 0;
    for (double x : window) s += x;
    return s / static_cast<double>(window.size());
}

double evaluate(std::span<const double> predictions,
                std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw DataError("evaluate: length mismatch (" +
                        std::to_string(predictions.size()) + " vs " +
                        std::to_string(targets.size()) + ")");
    if (predictions.empty()) throw DataError("evaluate: empty input");
    double s = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double e = predictions[i] - targets[i];
        s += e * e;
    }
    return s / static_cast<double>(predictions.size());
}

namespace {

void write_tensor(std::ofstream &out, const std::string &name,
                  const Eigen::MatrixXd &m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 == m.cols() ? '\n' : ' ');
        }
    }
}

Eigen::MatrixXd read_tensor(std::ifstream &in, const std::string &expect_name) {
    std::string name;
    Eigen::Index rows, cols;
    if (!(in >> name >> rows >> cols) || name != expect_name)
        throw DataError("LstmRegressor::load: expected tensor '" + expect_name +
                        "', got '" + name + "'");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> m(i, j)))
                throw DataError("LstmRegressor::load: truncated tensor " + name);
    return m;
}

const char *const kGateNames[4] = {"input", "forget", "output", "candidate"};

}  // namespace

void LstmRegressor::save(const std::filesystem::path &path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "lstm_regressor " << hidden_ << '\n';
    for (int g = 0; g < 4; ++g) {
        write_tensor(out, std::string(kGateNames[g]) + "_wx", w_x_[g]);
        write_tensor(out, std::string(kGateNames[g]) + "_wh", w_h_[g]);
        write_tensor(out, std::string(kGateNames[g]) + "_bias", bias_[g]);
    }
    write_tensor(out, "readout", readout_);
    Eigen::MatrixXd rb(1, 1);
    rb(0, 0) = readout_bias_;
    write_tensor(out, "readout_bias", rb);
}

LstmRegressor LstmRegressor::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string magic;
    int hidden;
    if (!(in >> magic >> hidden) || magic != "lstm_regressor")
        throw DataError(path.string() + ": not a serialized LSTM regressor");
    LstmRegressor model(hidden);
    for (int g = 0; g < 4; ++g) {
        model.w_x_[g] = read_tensor(in, std::string(kGateNames[g]) + "_wx");
        model.w_h_[g] = read_tensor(in, std::string(kGateNames[g]) + "_wh");
        model.bias_[g] = read_tensor(in, std::string(kGateNames[g]) + "_bias");
    }
    model.readout_ = read_tensor(in, "readout");
    model.readout_bias_ = read_tensor(in, "readout_bias")(0, 0);
    return model;
}

}  // namespace embshift
