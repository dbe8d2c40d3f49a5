// Computes the performance limits of a small in-memory dataset.

#include <iostream>

#include "ild/ild.hpp"

int main() {
    // Two binary features; each bucket holds (m0, m1) class counts.
    const ild::AggregatedDataset data({
        {{0, 0}, 40, 5},
        {{0, 1}, 25, 15},
        {{1, 0}, 10, 20},
        {{1, 1}, 3, 30},
    });

    const auto report = ild::limit_report(data);
    std::cout << ild::report_to_json(report).dump(2) << '\n';

    const auto curve = ild::ild_curve(data);
    std::cout << "flip order:";
    for (auto j : curve.flip_order) std::cout << ' ' << j;
    std::cout << "\nbest AUC " << curve.auc << ", random flips AUC "
              << ild::roc_of_random_flips(data, 1).auc << '\n';
}
