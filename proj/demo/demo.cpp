// Select representative samples and features from a small synthetic matrix.
//
//   ./build/alfs_demo [path/to/data.csv]

#include <cstdio>
#include <iostream>

#include "alfs/alfs.hpp"

int main(int argc, char** argv) {
  using namespace alfs;
  try {
    Dataset ds;
    if (argc > 1) {
      ds = load_csv(argv[1]);
    } else {
      // Three latent columns, every other sample is a noisy mix of them.
      Rng rng(7);
      const MatrixXd basis = gaussian_matrix(rng, 8, 3);
      MatrixXd x(8, 20);
      for (Index j = 0; j < 20; ++j) {
        VectorXd mix(3);
        for (Index k = 0; k < 3; ++k) mix(k) = uniform01(rng);
        mix /= mix.sum();
        x.col(j) = basis * mix;
        for (Index i = 0; i < 8; ++i) x(i, j) += 0.05 * standard_normal(rng);
      }
      for (Index k = 0; k < 3; ++k) x.col(5 * k + 2) = basis.col(k);
      ds = make_dataset(x);
    }

    const SelectionRequest req{std::min<Index>(3, ds.size()), std::min<Index>(3, ds.dim())};
    const SolveResult solved = solve(ds, RegularizationParams{}, SolverConfig{});
    const SelectionResult sel = rank_and_select(solved.w, req);

    std::printf("%s after %zu outer iterations\n", to_string(solved.report.stop_reason),
                solved.report.iterations.size());
    std::printf("samples :");
    for (Index j : sel.selected_samples) std::printf(" %ld", static_cast<long>(j));
    std::printf("\nfeatures:");
    for (Index i : sel.selected_features) std::printf(" %s", ds.feature_names[static_cast<std::size_t>(i)].c_str());
    std::printf("\nreconstruction error %.6g\n",
                reconstruction_error(ds.matrix, sel.selected_samples, sel.selected_features));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
