#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "flood/surrogate.hpp"

using namespace flood;

namespace {

Architecture tiny_arch(int n_features = 5, int n_cells = 3) {
    Architecture a;
    a.n_features = n_features;
    a.n_cells = n_cells;
    a.conv_channels = {2, 3};
    a.kernel_size = 3;
    a.dense_widths = {4, 5, 6};
    a.dropout_p = 0.0;
    return a;
}

Matrix random_matrix(std::mt19937_64& rng, long rows, long cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = lo + (hi - lo) * u01(rng());
    return m;
}

double training_loss(SurrogateModel& model, const Matrix& x, const Matrix& y) {
    model.set_mode(Mode::training);
    return mse_loss(model.forward(x), y);
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("the same seed initializes bit-identical weights") {
    SurrogateModel a(tiny_arch(), 1234);
    SurrogateModel b(tiny_arch(), 1234);
    SurrogateModel c(tiny_arch(), 1235);
    CHECK(a.snapshot_weights() == b.snapshot_weights());
    CHECK(a.snapshot_weights() != c.snapshot_weights());
}

TEST_CASE("the output layer is as wide as the simulation domain") {
    // Table-2-sized head: 16218 cells at 30 m
    SurrogateModel model = init_model(28, 16218, 7);
    Matrix x = Matrix::Zero(1, 28);
    model.set_mode(Mode::inference);
    Matrix y = model.forward(x);
    REQUIRE(y.cols() == 16218);
    for (long j = 0; j < y.cols(); ++j) REQUIRE(std::isfinite(y(0, j)));
}

TEST_CASE("forward maps a batch of B rows to B x n_cells") {
    SurrogateModel model(tiny_arch(), 5);
    std::mt19937_64 rng(6);
    Matrix x = random_matrix(rng, 7, 5);
    model.set_mode(Mode::inference);
    Matrix y = model.forward(x);
    CHECK(y.rows() == 7);
    CHECK(y.cols() == 3);
}

TEST_CASE("inference mode is deterministic bitwise") {
    SurrogateModel model(tiny_arch(), 5);
    std::mt19937_64 rng(6);
    Matrix x = random_matrix(rng, 4, 5);
    model.set_mode(Mode::inference);
    Matrix a = model.forward(x);
    Matrix b = model.forward(x);
    for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) REQUIRE(a(r, c) == b(r, c));
}

TEST_CASE("mismatched input widths are rejected, never truncated") {
    SurrogateModel model(tiny_arch(), 5);
    Matrix wide = Matrix::Zero(2, 9);
    CHECK_THROWS_AS(model.forward(wide), validation_error);
    Matrix y_bad = Matrix::Zero(2, 4);
    Matrix x = Matrix::Zero(2, 5);
    CHECK_THROWS_AS(model.loss_and_gradients(x, y_bad), validation_error);
}

TEST_CASE("backprop matches central finite differences on every parameter") {
    SurrogateModel model(tiny_arch(5, 3), 99);
    // jitter every parameter off its structured init (zero biases put ReLU
    // pre-activations exactly on the kink, where the loss is not differentiable)
    std::mt19937_64 prng(301);
    for (auto& p : model.parameters())
        for (size_t i = 0; i < p.n; ++i) p.value[i] += 0.05 * (2.0 * u01(prng()) - 1.0);
    std::mt19937_64 rng(17);
    const Matrix x = random_matrix(rng, 4, 5, -2.0, 2.0);
    const Matrix y = random_matrix(rng, 4, 3, 0.0, 2.0);

    model.loss_and_gradients(x, y);
    auto params = model.parameters();
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) analytic.emplace_back(p.grad, p.grad + p.n);

    const double eps = 1e-5;
    size_t checked = 0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        for (size_t i = 0; i < p.n; ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + eps;
            const double lp = training_loss(model, x, y);
            p.value[i] = saved - eps;
            const double lm = training_loss(model, x, y);
            p.value[i] = saved;
            const double fd = (lp - lm) / (2.0 * eps);
            const double ga = analytic[pi][i];
            const double tol = std::max(1e-7, 1e-4 * std::max(std::abs(fd), std::abs(ga)));
            if (std::abs(fd - ga) > tol) {
                CAPTURE(p.name);
                CAPTURE(i);
                CAPTURE(fd);
                CAPTURE(ga);
                REQUIRE(std::abs(fd - ga) <= tol);
            }
            ++checked;
        }
    }
    CHECK(checked > 150);  // every parameter of the 5-layer stack was covered
}

TEST_CASE("inference equals the exact expectation over dropout masks on a linear probe") {
    nn::Dropout drop;
    drop.p = 0.25;
    std::mt19937_64 rng(31);
    const Matrix x = random_matrix(rng, 1, 6);
    const Matrix w = random_matrix(rng, 6, 3);

    // exact enumeration of all 2^6 masks with Bernoulli(keep = 1-p) weights
    Matrix expectation = Matrix::Zero(1, 3);
    for (int bits = 0; bits < 64; ++bits) {
        Matrix mask(1, 6);
        double prob = 1.0;
        for (int j = 0; j < 6; ++j) {
            const bool keep = bits & (1 << j);
            mask(0, j) = keep ? 1.0 : 0.0;
            prob *= keep ? (1.0 - drop.p) : drop.p;
        }
        expectation += prob * (drop.forward_with_mask(x, mask) * w);
    }
    const Matrix inference = x * w;  // dropout is the identity in inference mode
    for (long j = 0; j < 3; ++j) CHECK(expectation(0, j) == doctest::Approx(inference(0, j)).epsilon(1e-12));
}

TEST_CASE("training-mode dropout uses inverted scaling") {
    nn::Dropout drop;
    drop.p = 0.5;
    std::mt19937_64 rng(8);
    Matrix x = Matrix::Ones(1, 1000);
    Matrix y = drop.forward(x, Mode::training, rng);
    int kept = 0;
    for (long j = 0; j < y.cols(); ++j) {
        REQUIRE((y(0, j) == 0.0 || y(0, j) == 2.0));
        if (y(0, j) != 0.0) ++kept;
    }
    CHECK(kept > 400);
    CHECK(kept < 600);
}

TEST_CASE("the synthetic val-loss sequence stops after epoch 6") {
    EarlyStopper stopper;
    stopper.patience = 5;
    stopper.min_delta = 0.001;
    const std::vector<double> vals{1.0, 0.9995, 0.9994, 0.9993, 0.9992, 0.9991};
    int stopped_at = 0;
    for (int e = 1; e <= static_cast<int>(vals.size()); ++e) {
        auto upd = stopper.observe(e, vals[static_cast<size_t>(e - 1)]);
        if (e < 6) CHECK(!upd.stop);
        if (upd.stop) {
            stopped_at = e;
            break;
        }
    }
    CHECK(stopped_at == 6);
    CHECK(stopper.best_val == 0.9991);
    CHECK(stopper.best_epoch == 6);
}

TEST_CASE("improvements of at least min_delta reset the patience counter") {
    EarlyStopper stopper;
    stopper.patience = 2;
    stopper.min_delta = 0.1;
    CHECK(!stopper.observe(1, 1.0).stop);
    CHECK(!stopper.observe(2, 0.85).stop);  // improved by 0.15: reset
    CHECK(!stopper.observe(3, 0.84).stop);  // stale 1
    CHECK(stopper.observe(4, 0.83).stop);   // stale 2 -> stop
}

TEST_CASE("a tiny dataset is memorized to under 1% of the epoch-1 loss") {
    std::mt19937_64 rng(77);
    const int n = 20;
    Matrix x = random_matrix(rng, n, 6, -1.0, 1.0);
    Matrix y(n, 4);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < 4; ++j)
            y(i, j) = std::max(0.0, 0.5 * x(i, 0) + 0.3 * x(i, (j % 6)) * x(i, 1) + 0.2 * j);

    Architecture arch = tiny_arch(6, 4);
    arch.conv_channels = {4, 8};
    arch.dense_widths = {8, 16, 32};
    SurrogateModel model(arch, 123);
    TrainConfig tc;
    tc.learning_rate = 0.01;
    tc.batch_size = 10;
    tc.max_epochs = 500;
    tc.patience = 100;
    tc.min_delta = 1e-9;
    tc.val_fraction = 0.1;
    tc.seed = 5;
    auto history = train_model(model, x, y, tc);
    REQUIRE(!history.empty());
    CHECK(history.back().train_loss <= 0.01 * history.front().train_loss);
}

TEST_CASE("training is deterministic given seed, dataset and config") {
    std::mt19937_64 rng(50);
    Matrix x = random_matrix(rng, 24, 5);
    Matrix y = random_matrix(rng, 24, 3, 0.0, 1.0);
    Architecture arch = tiny_arch();
    arch.dropout_p = 0.2;  // exercise the dropout rng path too
    TrainConfig tc;
    tc.max_epochs = 12;
    tc.patience = 50;
    tc.seed = 9;
    SurrogateModel a(arch, 4);
    SurrogateModel b(arch, 4);
    auto ha = train_model(a, x, y, tc);
    auto hb = train_model(b, x, y, tc);
    REQUIRE(ha.size() == hb.size());
    for (size_t i = 0; i < ha.size(); ++i) {
        REQUIRE(ha[i].train_loss == hb[i].train_loss);
        REQUIRE(ha[i].val_loss == hb[i].val_loss);
    }
    CHECK(a.snapshot_weights() == b.snapshot_weights());
}

TEST_CASE("early stopping restores the best-val weights") {
    std::mt19937_64 rng(51);
    Matrix x = random_matrix(rng, 30, 5);
    Matrix y = random_matrix(rng, 30, 3, 0.0, 1.0);
    TrainConfig tc;
    tc.max_epochs = 25;
    tc.patience = 50;  // run all epochs
    tc.seed = 13;
    SurrogateModel full(tiny_arch(), 21);
    auto history = train_model(full, x, y, tc);
    int best_epoch = 1;
    double best_val = history.front().val_loss;
    for (const auto& rec : history)
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            best_epoch = rec.epoch;
        }
    // replaying the same deterministic run up to the best epoch must yield the
    // same weights the full run restored
    SurrogateModel replay(tiny_arch(), 21);
    TrainConfig tc2 = tc;
    tc2.max_epochs = best_epoch;
    auto history2 = train_model(replay, x, y, tc2);
    CHECK(history2.back().val_loss == best_val);
    CHECK(full.snapshot_weights() == replay.snapshot_weights());
}

TEST_CASE("diverged training aborts with diagnostics") {
    std::mt19937_64 rng(52);
    Matrix x = random_matrix(rng, 16, 5, -5.0, 5.0);
    Matrix y = random_matrix(rng, 16, 3, 0.0, 1.0);
    SurrogateModel model(tiny_arch(), 3);
    TrainConfig tc;
    tc.learning_rate = 1e150;
    tc.max_epochs = 50;
    tc.seed = 2;
    CHECK_THROWS_WITH_AS(train_model(model, x, y, tc), doctest::Contains("epoch"), numerical_error);
}

TEST_CASE("save/load round-trips the model bitwise, including batch-norm stats") {
    std::mt19937_64 rng(53);
    Matrix x = random_matrix(rng, 20, 5);
    Matrix y = random_matrix(rng, 20, 3, 0.0, 1.0);
    SurrogateModel model(tiny_arch(), 77);
    TrainConfig tc;
    tc.max_epochs = 5;
    tc.seed = 4;
    train_model(model, x, y, tc);  // move the BN running statistics off their init
    model.norm.mean = {1.0, 2.0, 3.0, 4.0, 5.0};
    model.norm.std = {1.0, 1.0, 2.0, 2.0, 0.5};

    const std::string path = temp_file("surrogate_rt.bin");
    save_model(model, path);
    SurrogateModel back = load_model(path);
    CHECK(back.arch().n_cells == 3);
    CHECK(back.norm.mean == model.norm.mean);
    CHECK(back.snapshot_weights() == model.snapshot_weights());

    Matrix probe = random_matrix(rng, 3, 5);
    model.set_mode(Mode::inference);
    back.set_mode(Mode::inference);
    Matrix a = model.forward(probe);
    Matrix b = back.forward(probe);
    for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) REQUIRE(a(r, c) == b(r, c));
}

TEST_CASE("truncated or corrupted model files never load partially") {
    SurrogateModel model(tiny_arch(), 7);
    const std::string path = temp_file("surrogate_trunc.bin");
    save_model(model, path);
    const std::string full = read_text_file(path);

    write_text_file(path, full.substr(0, full.size() / 2));
    CHECK_THROWS_AS(load_model(path), parse_error);

    std::string flipped = full;
    flipped[flipped.size() / 3] = static_cast<char>(flipped[flipped.size() / 3] ^ 0x5a);
    write_text_file(path, flipped);
    CHECK_THROWS_AS(load_model(path), parse_error);

    write_text_file(path, "shrt");
    CHECK_THROWS_AS(load_model(path), parse_error);
}

TEST_CASE("history csv is written with one row per epoch") {
    std::vector<EpochRecord> history{{1, 0.5, 0.4}, {2, 0.25, 0.3}};
    const std::string path = temp_file("history.csv");
    write_history_csv(history, path);
    const std::string text = read_text_file(path);
    CHECK(text == "epoch,train_loss,val_loss\n1,0.5,0.4\n2,0.25,0.3\n");
}
