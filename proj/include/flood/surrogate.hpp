#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "flood/features.hpp"

namespace flood {

enum class Mode { training, inference };

namespace nn {

// Deterministic uniform in [0,1); std::uniform_real_distribution is
// implementation-defined, this is not.
inline double next_u01(std::mt19937_64& rng) { return u01(rng()); }

// Activations stored sample-major: row b of a Matrix holds the flattened
// (channel, position) block c*length + l.

struct Conv1d {
    int in_ch = 0, out_ch = 0, k = 0, length = 0;
    Eigen::VectorXd w;  // [out][in][k]
    Eigen::VectorXd b;  // [out]
    Eigen::VectorXd gw, gb;
    Matrix cached_in;

    void init(int in_channels, int out_channels, int kernel, int len, std::mt19937_64& rng);
    Matrix forward(const Matrix& x, bool cache);
    Matrix backward(const Matrix& dout);
    double& weight(int oc, int ic, int kk) { return w[(static_cast<long>(oc) * in_ch + ic) * k + kk]; }
    double weight(int oc, int ic, int kk) const { return w[(static_cast<long>(oc) * in_ch + ic) * k + kk]; }
};

struct BatchNorm1d {
    int ch = 0, length = 0;
    double momentum = 0.9;
    double eps = 1e-5;
    Eigen::VectorXd gamma, beta, running_mean, running_var;
    Eigen::VectorXd ggamma, gbeta;
    // training-pass cache
    Matrix cached_xhat;
    Eigen::VectorXd cached_inv_std;

    void init(int channels, int len);
    Matrix forward(const Matrix& x, Mode mode, bool cache);
    Matrix backward(const Matrix& dout);
};

struct Relu {
    Matrix cached_in;
    Matrix forward(const Matrix& x, bool cache);
    Matrix backward(const Matrix& dout) const;
};

struct Dense {
    int in = 0, out = 0;
    Matrix w;  // in x out
    Eigen::VectorXd b;
    Matrix gw;
    Eigen::VectorXd gb;
    Matrix cached_in;

    void init(int in_features, int out_features, std::mt19937_64& rng);
    Matrix forward(const Matrix& x, bool cache);
    Matrix backward(const Matrix& dout);
};

// Inverted dropout: training scales kept units by 1/(1-p); inference is the
// identity, which equals the expectation over masks.
struct Dropout {
    double p = 0.0;
    Matrix mask;

    Matrix forward(const Matrix& x, Mode mode, std::mt19937_64& rng);
    // Deterministic-mask variant used by the expectation property test.
    Matrix forward_with_mask(const Matrix& x, const Matrix& keep_mask) const;
    Matrix backward(const Matrix& dout) const;
};

}  // namespace nn

struct Architecture {
    int n_features = 0;
    int n_cells = 0;
    std::array<int, 2> conv_channels{28, 128};
    int kernel_size = 3;
    std::array<int, 3> dense_widths{32, 256, 512};
    double dropout_p = 0.2;

    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 10;
    double dropout_p = 0.2;
    int patience = 5;
    double min_delta = 0.001;
    int max_epochs = 200;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Early-stopping bookkeeping: an epoch resets the patience counter only when
// the validation loss improves on the reference by at least min_delta; best
// weights track the strict minimum regardless.
struct EarlyStopper {
    int patience = 5;
    double min_delta = 0.001;
    double reference = 0.0;
    double best_val = 0.0;
    int best_epoch = 0;
    int stale = 0;
    bool seen_any = false;

    struct Update {
        bool improved_best = false;  // snapshot weights now
        bool stop = false;           // halt after this epoch
    };
    Update observe(int epoch, double val_loss);
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
};

// Conv(c1,k) + BN + ReLU, Conv(c2,k) + BN + ReLU, Flatten,
// Dense(w1..w3) each + ReLU + Dropout, linear Dense(n_cells) head.
class SurrogateModel {
public:
    SurrogateModel() = default;
    // Deterministic fan-in-scaled uniform init, zero biases.
    SurrogateModel(const Architecture& arch, std::uint64_t seed);

    const Architecture& arch() const { return arch_; }
    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    // Batch forward; input width must equal n_features.
    Matrix forward(const Matrix& x);

    // Training-mode forward + backward of the MSE loss; fills the parameter
    // gradients and returns the loss.
    double loss_and_gradients(const Matrix& x, const Matrix& y);

    struct ParamView {
        std::string name;
        double* value = nullptr;
        double* grad = nullptr;
        std::size_t n = 0;
    };
    std::vector<ParamView> parameters();

    std::vector<double> snapshot_weights() const;  // includes BN running stats
    void restore_weights(const std::vector<double>& snap);

    // Dataset normalizer carried with the model file.
    Normalizer norm;

    std::mt19937_64& dropout_rng() { return dropout_rng_; }
    void seed_dropout(std::uint64_t seed) { dropout_rng_.seed(seed); }

private:
    Architecture arch_;
    Mode mode_ = Mode::inference;
    std::mt19937_64 dropout_rng_{0};

    nn::Conv1d conv1_, conv2_;
    nn::BatchNorm1d bn1_, bn2_;
    nn::Relu relu1_, relu2_, relu3_, relu4_, relu5_;
    nn::Dense dense1_, dense2_, dense3_, head_;
    nn::Dropout drop1_, drop2_, drop3_;

    friend void save_model(const SurrogateModel&, const std::string&);
    friend SurrogateModel load_model(const std::string&);
};

inline SurrogateModel init_model(int n_features, int n_cells, std::uint64_t seed) {
    Architecture arch;
    arch.n_features = n_features;
    arch.n_cells = n_cells;
    return SurrogateModel(arch, seed);
}

// Mean-squared error over all cells of a batch.
double mse_loss(const Matrix& pred, const Matrix& target);

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) with MSE loss, deterministic
// seeded validation split and batch order, early stopping with best-weight
// restoration. X must already be normalized.
std::vector<EpochRecord> train_model(SurrogateModel& model, const Matrix& x, const Matrix& y,
                                     const TrainConfig& cfg);

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

// Single binary container: versioned header, architecture, normalizer,
// little-endian f64 weight blobs, trailing FNV-1a checksum.
void save_model(const SurrogateModel& model, const std::string& path);
SurrogateModel load_model(const std::string& path);

}  // namespace flood
