#include "topicstab/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace topicstab {

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols())
        throw std::invalid_argument("min_cost_assignment: matrix must be square");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};
    if (!cost.allFinite())
        throw std::invalid_argument("min_cost_assignment: costs must be finite");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> row_pot(n, 0.0);
    std::vector<double> col_pot(n + 1, 0.0);
    std::vector<int> match(n + 1, -1); // match[j] = row assigned to column j; n is virtual
    std::vector<int> way(n + 1, n);

    for (int i = 0; i < n; ++i) {
        match[n] = i;
        int j0 = n;
        std::vector<double> min_reduced(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double reduced = cost(i0, j) - row_pot[i0] - col_pot[j];
                if (reduced < min_reduced[j]) {
                    min_reduced[j] = reduced;
                    way[j] = j0;
                }
                if (min_reduced[j] < delta) {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    row_pot[match[j]] += delta;
                    col_pot[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != -1);
        // Walk the alternating path back to the virtual column, flipping
        // assignments along the way.
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != n);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 0; j < n; ++j)
        if (match[j] >= 0) row_to_col[static_cast<std::size_t>(match[j])] = j;
    return row_to_col;
}

} // namespace topicstab
