#include "flood/surrogate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace flood {

namespace nn {

void Conv1d::init(int in_channels, int out_channels, int kernel, int len, std::mt19937_64& rng) {
    in_ch = in_channels;
    out_ch = out_channels;
    k = kernel;
    length = len;
    const long nw = static_cast<long>(out_ch) * in_ch * k;
    w.resize(nw);
    b = Eigen::VectorXd::Zero(out_ch);
    gw = Eigen::VectorXd::Zero(nw);
    gb = Eigen::VectorXd::Zero(out_ch);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * k);
    for (long i = 0; i < nw; ++i) w[i] = (2.0 * next_u01(rng) - 1.0) * bound;
}

Matrix Conv1d::forward(const Matrix& x, bool cache) {
    const long B = x.rows();
    const int pad = (k - 1) / 2;
    Matrix out(B, static_cast<long>(out_ch) * length);
    for (long bi = 0; bi < B; ++bi) {
        for (int oc = 0; oc < out_ch; ++oc) {
            for (int l = 0; l < length; ++l) {
                double acc = b[oc];
                for (int ic = 0; ic < in_ch; ++ic) {
                    const long base = static_cast<long>(ic) * length;
                    for (int kk = 0; kk < k; ++kk) {
                        const int pos = l + kk - pad;
                        if (pos < 0 || pos >= length) continue;
                        acc += weight(oc, ic, kk) * x(bi, base + pos);
                    }
                }
                out(bi, static_cast<long>(oc) * length + l) = acc;
            }
        }
    }
    if (cache) cached_in = x;
    return out;
}

Matrix Conv1d::backward(const Matrix& dout) {
    const Matrix& x = cached_in;
    const long B = x.rows();
    const int pad = (k - 1) / 2;
    Matrix dx = Matrix::Zero(B, static_cast<long>(in_ch) * length);
    for (long bi = 0; bi < B; ++bi) {
        for (int oc = 0; oc < out_ch; ++oc) {
            const long obase = static_cast<long>(oc) * length;
            for (int l = 0; l < length; ++l) {
                const double g = dout(bi, obase + l);
                gb[oc] += g;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const long ibase = static_cast<long>(ic) * length;
                    for (int kk = 0; kk < k; ++kk) {
                        const int pos = l + kk - pad;
                        if (pos < 0 || pos >= length) continue;
                        gw[(static_cast<long>(oc) * in_ch + ic) * k + kk] += g * x(bi, ibase + pos);
                        dx(bi, ibase + pos) += g * weight(oc, ic, kk);
                    }
                }
            }
        }
    }
    return dx;
}

void BatchNorm1d::init(int channels, int len) {
    ch = channels;
    length = len;
    gamma = Eigen::VectorXd::Ones(ch);
    beta = Eigen::VectorXd::Zero(ch);
    running_mean = Eigen::VectorXd::Zero(ch);
    running_var = Eigen::VectorXd::Ones(ch);
    ggamma = Eigen::VectorXd::Zero(ch);
    gbeta = Eigen::VectorXd::Zero(ch);
}

Matrix BatchNorm1d::forward(const Matrix& x, Mode mode, bool cache) {
    const long B = x.rows();
    Matrix out(B, x.cols());
    if (mode == Mode::inference) {
        for (int c = 0; c < ch; ++c) {
            const long base = static_cast<long>(c) * length;
            const double inv = 1.0 / std::sqrt(running_var[c] + eps);
            for (long bi = 0; bi < B; ++bi)
                for (int l = 0; l < length; ++l)
                    out(bi, base + l) = gamma[c] * ((x(bi, base + l) - running_mean[c]) * inv) + beta[c];
        }
        return out;
    }

    const double n = static_cast<double>(B) * length;
    if (cache) {
        cached_xhat.resize(B, x.cols());
        cached_inv_std.resize(ch);
    }
    for (int c = 0; c < ch; ++c) {
        const long base = static_cast<long>(c) * length;
        double mean = 0.0;
        for (long bi = 0; bi < B; ++bi)
            for (int l = 0; l < length; ++l) mean += x(bi, base + l);
        mean /= n;
        double var = 0.0;
        for (long bi = 0; bi < B; ++bi)
            for (int l = 0; l < length; ++l) {
                const double d = x(bi, base + l) - mean;
                var += d * d;
            }
        var /= n;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (long bi = 0; bi < B; ++bi)
            for (int l = 0; l < length; ++l) {
                const double xhat = (x(bi, base + l) - mean) * inv;
                if (cache) cached_xhat(bi, base + l) = xhat;
                out(bi, base + l) = gamma[c] * xhat + beta[c];
            }
        if (cache) cached_inv_std[c] = inv;
        running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * mean;
        running_var[c] = momentum * running_var[c] + (1.0 - momentum) * var;
    }
    return out;
}

Matrix BatchNorm1d::backward(const Matrix& dout) {
    const long B = dout.rows();
    const double n = static_cast<double>(B) * length;
    Matrix dx(B, dout.cols());
    for (int c = 0; c < ch; ++c) {
        const long base = static_cast<long>(c) * length;
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (long bi = 0; bi < B; ++bi)
            for (int l = 0; l < length; ++l) {
                const double dy = dout(bi, base + l);
                sum_dy += dy;
                sum_dy_xhat += dy * cached_xhat(bi, base + l);
            }
        gbeta[c] += sum_dy;
        ggamma[c] += sum_dy_xhat;
        const double scale = gamma[c] * cached_inv_std[c] / n;
        for (long bi = 0; bi < B; ++bi)
            for (int l = 0; l < length; ++l) {
                const double dy = dout(bi, base + l);
                dx(bi, base + l) = scale * (n * dy - sum_dy - cached_xhat(bi, base + l) * sum_dy_xhat);
            }
    }
    return dx;
}

Matrix Relu::forward(const Matrix& x, bool cache) {
    if (cache) cached_in = x;
    return x.cwiseMax(0.0);
}

Matrix Relu::backward(const Matrix& dout) const {
    return (cached_in.array() > 0.0).select(dout, Matrix::Zero(dout.rows(), dout.cols()));
}

void Dense::init(int in_features, int out_features, std::mt19937_64& rng) {
    in = in_features;
    out = out_features;
    w.resize(in, out);
    b = Eigen::VectorXd::Zero(out);
    gw = Matrix::Zero(in, out);
    gb = Eigen::VectorXd::Zero(out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < in; ++i)
        for (int j = 0; j < out; ++j) w(i, j) = (2.0 * next_u01(rng) - 1.0) * bound;
}

Matrix Dense::forward(const Matrix& x, bool cache) {
    if (cache) cached_in = x;
    Matrix out = x * w;
    out.rowwise() += b.transpose();
    return out;
}

Matrix Dense::backward(const Matrix& dout) {
    gw += cached_in.transpose() * dout;
    gb += dout.colwise().sum().transpose();
    return dout * w.transpose();
}

Matrix Dropout::forward(const Matrix& x, Mode mode, std::mt19937_64& rng) {
    if (mode == Mode::inference || p == 0.0) {
        mask.resize(0, 0);
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - p);
    mask.resize(x.rows(), x.cols());
    for (long i = 0; i < x.rows(); ++i)
        for (long j = 0; j < x.cols(); ++j) mask(i, j) = (next_u01(rng) < p) ? 0.0 : keep_scale;
    return x.cwiseProduct(mask);
}

Matrix Dropout::forward_with_mask(const Matrix& x, const Matrix& keep_mask) const {
    const double keep_scale = 1.0 / (1.0 - p);
    return x.cwiseProduct(keep_mask) * keep_scale;
}

Matrix Dropout::backward(const Matrix& dout) const {
    if (mask.size() == 0) return dout;
    return dout.cwiseProduct(mask);
}

}  // namespace nn

void Architecture::validate() const {
    if (n_features < 1 || n_cells < 1)
        throw validation_error("architecture: n_features and n_cells must be >= 1");
    if (conv_channels[0] < 1 || conv_channels[1] < 1 || kernel_size < 1)
        throw validation_error("architecture: conv channels and kernel size must be >= 1");
    for (int w : dense_widths)
        if (w < 1) throw validation_error("architecture: dense widths must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw validation_error("architecture: dropout_p must be in [0, 1)");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw validation_error("train config: learning_rate must be positive");
    if (batch_size < 1) throw validation_error("train config: batch_size must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw validation_error("train config: dropout_p must be in [0, 1)");
    if (patience < 1) throw validation_error("train config: patience must be >= 1");
    if (!(min_delta >= 0)) throw validation_error("train config: min_delta must be non-negative");
    if (max_epochs < 1) throw validation_error("train config: max_epochs must be >= 1");
    if (!(val_fraction > 0.0) || !(val_fraction < 0.5))
        throw validation_error("train config: val_fraction must be in (0, 0.5)");
}

EarlyStopper::Update EarlyStopper::observe(int epoch, double val_loss) {
    Update u;
    if (!seen_any) {
        seen_any = true;
        reference = val_loss;
        best_val = val_loss;
        best_epoch = epoch;
        stale = 0;
        u.improved_best = true;
        u.stop = false;
        return u;
    }
    if (val_loss < best_val) {
        best_val = val_loss;
        best_epoch = epoch;
        u.improved_best = true;
    }
    if (val_loss <= reference - min_delta) {
        reference = val_loss;
        stale = 0;
    } else {
        ++stale;
    }
    u.stop = stale >= patience;
    return u;
}

SurrogateModel::SurrogateModel(const Architecture& arch, std::uint64_t seed) : arch_(arch) {
    arch_.validate();
    std::mt19937_64 rng(seed);
    const int L = arch_.n_features;
    conv1_.init(1, arch_.conv_channels[0], arch_.kernel_size, L, rng);
    bn1_.init(arch_.conv_channels[0], L);
    conv2_.init(arch_.conv_channels[0], arch_.conv_channels[1], arch_.kernel_size, L, rng);
    bn2_.init(arch_.conv_channels[1], L);
    const int flat = arch_.conv_channels[1] * L;
    dense1_.init(flat, arch_.dense_widths[0], rng);
    dense2_.init(arch_.dense_widths[0], arch_.dense_widths[1], rng);
    dense3_.init(arch_.dense_widths[1], arch_.dense_widths[2], rng);
    head_.init(arch_.dense_widths[2], arch_.n_cells, rng);
    drop1_.p = drop2_.p = drop3_.p = arch_.dropout_p;
}

Matrix SurrogateModel::forward(const Matrix& x) {
    if (x.cols() != arch_.n_features)
        throw validation_error("surrogate forward: shape error, expected " + std::to_string(arch_.n_features) +
                               " features, got " + std::to_string(x.cols()));
    const bool train = (mode_ == Mode::training);
    Matrix a = conv1_.forward(x, train);
    a = bn1_.forward(a, mode_, train);
    a = relu1_.forward(a, train);
    a = conv2_.forward(a, train);
    a = bn2_.forward(a, mode_, train);
    a = relu2_.forward(a, train);
    // Flatten is the identity on this layout.
    a = dense1_.forward(a, train);
    a = relu3_.forward(a, train);
    a = drop1_.forward(a, mode_, dropout_rng_);
    a = dense2_.forward(a, train);
    a = relu4_.forward(a, train);
    a = drop2_.forward(a, mode_, dropout_rng_);
    a = dense3_.forward(a, train);
    a = relu5_.forward(a, train);
    a = drop3_.forward(a, mode_, dropout_rng_);
    return head_.forward(a, train);
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw validation_error("mse_loss: shape mismatch");
    const double n = static_cast<double>(pred.rows()) * pred.cols();
    return (pred - target).squaredNorm() / n;
}

double SurrogateModel::loss_and_gradients(const Matrix& x, const Matrix& y) {
    if (y.cols() != arch_.n_cells)
        throw validation_error("surrogate loss: target width " + std::to_string(y.cols()) +
                               " does not match n_cells " + std::to_string(arch_.n_cells));
    set_mode(Mode::training);
    for (auto& p : parameters()) std::memset(p.grad, 0, p.n * sizeof(double));

    Matrix pred = forward(x);
    const double n = static_cast<double>(pred.rows()) * pred.cols();
    const double loss = (pred - y).squaredNorm() / n;

    Matrix g = 2.0 * (pred - y) / n;
    g = head_.backward(g);
    g = drop3_.backward(g);
    g = relu5_.backward(g);
    g = dense3_.backward(g);
    g = drop2_.backward(g);
    g = relu4_.backward(g);
    g = dense2_.backward(g);
    g = drop1_.backward(g);
    g = relu3_.backward(g);
    g = dense1_.backward(g);
    g = relu2_.backward(g);
    g = bn2_.backward(g);
    g = conv2_.backward(g);
    g = relu1_.backward(g);
    g = bn1_.backward(g);
    g = conv1_.backward(g);
    return loss;
}

std::vector<SurrogateModel::ParamView> SurrogateModel::parameters() {
    std::vector<ParamView> out;
    auto add = [&](const std::string& name, double* v, double* g, std::size_t n) {
        out.push_back({name, v, g, n});
    };
    add("conv1.w", conv1_.w.data(), conv1_.gw.data(), conv1_.w.size());
    add("conv1.b", conv1_.b.data(), conv1_.gb.data(), conv1_.b.size());
    add("bn1.gamma", bn1_.gamma.data(), bn1_.ggamma.data(), bn1_.gamma.size());
    add("bn1.beta", bn1_.beta.data(), bn1_.gbeta.data(), bn1_.beta.size());
    add("conv2.w", conv2_.w.data(), conv2_.gw.data(), conv2_.w.size());
    add("conv2.b", conv2_.b.data(), conv2_.gb.data(), conv2_.b.size());
    add("bn2.gamma", bn2_.gamma.data(), bn2_.ggamma.data(), bn2_.gamma.size());
    add("bn2.beta", bn2_.beta.data(), bn2_.gbeta.data(), bn2_.beta.size());
    add("dense1.w", dense1_.w.data(), dense1_.gw.data(), dense1_.w.size());
    add("dense1.b", dense1_.b.data(), dense1_.gb.data(), dense1_.b.size());
    add("dense2.w", dense2_.w.data(), dense2_.gw.data(), dense2_.w.size());
    add("dense2.b", dense2_.b.data(), dense2_.gb.data(), dense2_.b.size());
    add("dense3.w", dense3_.w.data(), dense3_.gw.data(), dense3_.w.size());
    add("dense3.b", dense3_.b.data(), dense3_.gb.data(), dense3_.b.size());
    add("head.w", head_.w.data(), head_.gw.data(), head_.w.size());
    add("head.b", head_.b.data(), head_.gb.data(), head_.b.size());
    return out;
}

std::vector<double> SurrogateModel::snapshot_weights() const {
    std::vector<double> snap;
    auto* self = const_cast<SurrogateModel*>(this);
    for (const auto& p : self->parameters()) snap.insert(snap.end(), p.value, p.value + p.n);
    for (const auto* bn : {&bn1_, &bn2_}) {
        snap.insert(snap.end(), bn->running_mean.data(), bn->running_mean.data() + bn->running_mean.size());
        snap.insert(snap.end(), bn->running_var.data(), bn->running_var.data() + bn->running_var.size());
    }
    return snap;
}

void SurrogateModel::restore_weights(const std::vector<double>& snap) {
    size_t off = 0;
    for (auto& p : parameters()) {
        if (off + p.n > snap.size()) throw validation_error("restore_weights: snapshot too short");
        std::memcpy(p.value, snap.data() + off, p.n * sizeof(double));
        off += p.n;
    }
    for (auto* bn : {&bn1_, &bn2_}) {
        const size_t n = static_cast<size_t>(bn->running_mean.size());
        if (off + 2 * n > snap.size()) throw validation_error("restore_weights: snapshot too short");
        std::memcpy(bn->running_mean.data(), snap.data() + off, n * sizeof(double));
        off += n;
        std::memcpy(bn->running_var.data(), snap.data() + off, n * sizeof(double));
        off += n;
    }
    if (off != snap.size()) throw validation_error("restore_weights: snapshot size mismatch");
}

namespace {

void fisher_yates(std::vector<long>& idx, std::mt19937_64& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

Matrix gather_rows(const Matrix& m, const std::vector<long>& idx, size_t begin, size_t end) {
    Matrix out(static_cast<long>(end - begin), m.cols());
    for (size_t i = begin; i < end; ++i) out.row(static_cast<long>(i - begin)) = m.row(idx[i]);
    return out;
}

}  // namespace

std::vector<EpochRecord> train_model(SurrogateModel& model, const Matrix& x, const Matrix& y,
                                     const TrainConfig& cfg) {
    cfg.validate();
    if (x.rows() != y.rows()) throw validation_error("train: X and Y row counts differ");
    if (x.rows() < 2) throw validation_error("train: need at least 2 samples");

    const long n = x.rows();
    std::vector<long> idx(n);
    for (long i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    std::mt19937_64 split_rng(derive_seed(cfg.seed, "split"));
    fisher_yates(idx, split_rng);
    long nval = static_cast<long>(std::floor(cfg.val_fraction * static_cast<double>(n) + 0.5));
    nval = std::max<long>(1, std::min(nval, n - 1));

    const Matrix xval = gather_rows(x, idx, 0, static_cast<size_t>(nval));
    const Matrix yval = gather_rows(y, idx, 0, static_cast<size_t>(nval));
    std::vector<long> train_idx(idx.begin() + nval, idx.end());

    model.seed_dropout(derive_seed(cfg.seed, "dropout"));
    std::mt19937_64 batch_rng(derive_seed(cfg.seed, "batches"));

    // Adam state, flat per parameter registry order.
    auto params = model.parameters();
    size_t total = 0;
    for (const auto& p : params) total += p.n;
    std::vector<double> m_state(total, 0.0), v_state(total, 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long adam_t = 0;

    EarlyStopper stopper;
    stopper.patience = cfg.patience;
    stopper.min_delta = cfg.min_delta;

    std::vector<double> best_snapshot = model.snapshot_weights();
    std::vector<EpochRecord> history;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        fisher_yates(train_idx, batch_rng);
        double se_sum = 0.0;
        long seen = 0;
        const size_t ntrain = train_idx.size();
        for (size_t begin = 0, batch_no = 1; begin < ntrain; begin += cfg.batch_size, ++batch_no) {
            const size_t end = std::min(ntrain, begin + cfg.batch_size);
            const Matrix xb = gather_rows(x, train_idx, begin, end);
            const Matrix yb = gather_rows(y, train_idx, begin, end);
            const double loss = model.loss_and_gradients(xb, yb);
            if (!std::isfinite(loss))
                throw numerical_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batch_no) + ", learning rate " +
                                      format_double(cfg.learning_rate));
            ++adam_t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            const double inv_sqrt_bc2 = 1.0 / std::sqrt(bc2);
            size_t off = 0;
            for (auto& p : params) {
                using Map = Eigen::Map<Eigen::ArrayXd>;
                Map g(p.grad, static_cast<long>(p.n));
                Map value(p.value, static_cast<long>(p.n));
                Map m(m_state.data() + off, static_cast<long>(p.n));
                Map v(v_state.data() + off, static_cast<long>(p.n));
                m = beta1 * m + (1.0 - beta1) * g;
                v = beta2 * v + (1.0 - beta2) * g.square();
                value -= (cfg.learning_rate / bc1) * m / (v.sqrt() * inv_sqrt_bc2 + adam_eps);
                off += p.n;
            }
            se_sum += loss * static_cast<double>(end - begin);
            seen += static_cast<long>(end - begin);
        }
        const double train_loss = se_sum / static_cast<double>(seen);

        model.set_mode(Mode::inference);
        const double val_loss = mse_loss(model.forward(xval), yval);
        if (!std::isfinite(val_loss))
            throw numerical_error("training diverged: non-finite validation loss at epoch " +
                                  std::to_string(epoch) + ", learning rate " + format_double(cfg.learning_rate));
        history.push_back({epoch, train_loss, val_loss});

        const auto upd = stopper.observe(epoch, val_loss);
        if (upd.improved_best) best_snapshot = model.snapshot_weights();
        if (upd.stop) break;
    }

    model.restore_weights(best_snapshot);
    model.set_mode(Mode::inference);
    return history;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (const auto& rec : history)
        out += std::to_string(rec.epoch) + "," + format_double(rec.train_loss) + "," +
               format_double(rec.val_loss) + "\n";
    write_text_file(path, out);
}

// --- Persistence ------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'F', 'S', 'G', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void put_bytes(std::string& buf, const void* p, size_t n) {
    buf.append(static_cast<const char*>(p), n);
}
void put_u32(std::string& buf, std::uint32_t v) { put_bytes(buf, &v, 4); }
void put_i32(std::string& buf, std::int32_t v) { put_bytes(buf, &v, 4); }
void put_f64(std::string& buf, double v) { put_bytes(buf, &v, 8); }

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const std::string& origin;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw parse_error(origin + ": truncated model file");
    }
    void get_bytes(void* p, size_t n) {
        need(n);
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    std::uint32_t get_u32() { std::uint32_t v; get_bytes(&v, 4); return v; }
    std::int32_t get_i32() { std::int32_t v; get_bytes(&v, 4); return v; }
    double get_f64() { double v; get_bytes(&v, 8); return v; }
};

}  // namespace

void save_model(const SurrogateModel& model, const std::string& path) {
    std::string buf;
    put_bytes(buf, kModelMagic, 4);
    put_u32(buf, kModelVersion);
    const Architecture& a = model.arch_;
    put_i32(buf, a.n_features);
    put_i32(buf, a.n_cells);
    put_i32(buf, a.conv_channels[0]);
    put_i32(buf, a.conv_channels[1]);
    put_i32(buf, a.kernel_size);
    put_i32(buf, a.dense_widths[0]);
    put_i32(buf, a.dense_widths[1]);
    put_i32(buf, a.dense_widths[2]);
    put_f64(buf, a.dropout_p);

    put_u32(buf, static_cast<std::uint32_t>(model.norm.mean.size()));
    for (double v : model.norm.mean) put_f64(buf, v);
    for (double v : model.norm.std) put_f64(buf, v);

    const std::vector<double> snap = model.snapshot_weights();
    put_u32(buf, static_cast<std::uint32_t>(snap.size()));
    put_bytes(buf, snap.data(), snap.size() * sizeof(double));

    const std::uint64_t checksum = fnv1a64(buf.data(), buf.size());
    put_bytes(buf, &checksum, 8);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write model file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out.good()) throw io_error("failed writing model file: " + path);
}

SurrogateModel load_model(const std::string& path) {
    const std::string buf = read_text_file(path);
    if (buf.size() < 16) throw parse_error(path + ": truncated model file");
    const std::uint64_t stored_checksum = fnv1a64(buf.data(), buf.size() - 8);
    std::uint64_t file_checksum = 0;
    std::memcpy(&file_checksum, buf.data() + buf.size() - 8, 8);
    if (stored_checksum != file_checksum)
        throw parse_error(path + ": checksum mismatch (corrupt or truncated model file)");

    Reader r{buf, 0, path};
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) throw parse_error(path + ": not a surrogate model file");
    const std::uint32_t version = r.get_u32();
    if (version != kModelVersion)
        throw parse_error(path + ": unsupported model format version " + std::to_string(version));

    Architecture a;
    a.n_features = r.get_i32();
    a.n_cells = r.get_i32();
    a.conv_channels[0] = r.get_i32();
    a.conv_channels[1] = r.get_i32();
    a.kernel_size = r.get_i32();
    a.dense_widths[0] = r.get_i32();
    a.dense_widths[1] = r.get_i32();
    a.dense_widths[2] = r.get_i32();
    a.dropout_p = r.get_f64();

    SurrogateModel model(a, 0);
    const std::uint32_t n_norm = r.get_u32();
    model.norm.mean.resize(n_norm);
    model.norm.std.resize(n_norm);
    for (auto& v : model.norm.mean) v = r.get_f64();
    for (auto& v : model.norm.std) v = r.get_f64();

    const std::uint32_t n_snap = r.get_u32();
    std::vector<double> snap(n_snap);
    r.get_bytes(snap.data(), static_cast<size_t>(n_snap) * sizeof(double));
    model.restore_weights(snap);
    if (r.pos + 8 != buf.size()) throw parse_error(path + ": unexpected trailing bytes in model file");
    model.set_mode(Mode::inference);
    return model;
}

}  // namespace flood
