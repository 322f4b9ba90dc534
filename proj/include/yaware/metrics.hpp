#pragma once

#include <vector>

namespace yaware {

// Mann-Whitney AUC: fraction of (positive, negative) pairs where the positive
// outscores the negative, ties counted 0.5. Computed via average ranks.
// Throws MetricError unless both classes are present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Fraction of samples where (score > 0) equals the label; scores are logits.
double accuracy(const std::vector<double>& scores,
                const std::vector<int>& labels);

// Average ranks (1-based, ties averaged), the Mann-Whitney/Spearman builder.
std::vector<double> average_ranks(const std::vector<double>& v);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Pearson correlation of average ranks.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);  // n-1 denominator

}  // namespace yaware
