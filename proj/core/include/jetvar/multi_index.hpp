#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace jetvar {

/* Derivative multi-index over the base directions: entry(s) counts repeated
 * d/dx^s.  All multi-indices living under one bundle share the same dimension. */
class MultiIndex {
public:
	MultiIndex() = default;
	explicit MultiIndex(int dim) : counts_(dim, 0) {}
	explicit MultiIndex(std::vector<int> counts) : counts_(std::move(counts)) {}

	static MultiIndex zero(int dim) { return MultiIndex(dim); }

	/* The single-direction index: exactly one entry equal to 1. */
	static MultiIndex unit(int dim, int dir)
	{
		MultiIndex a(dim);
		assert(dir >= 0 && dir < dim);
		a.counts_[dir] = 1;
		return a;
	}

	int dim() const { return (int)counts_.size(); }
	int operator[](int dir) const { return counts_[dir]; }

	/* |alpha| */
	int order() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

	bool is_zero() const { return order() == 0; }

	MultiIndex plus(int dir) const
	{
		MultiIndex a = *this;
		a.counts_[dir] += 1;
		return a;
	}

	MultiIndex plus(const MultiIndex& b) const
	{
		assert(dim() == b.dim());
		MultiIndex a = *this;
		for (int s = 0; s < dim(); ++s)
			a.counts_[s] += b.counts_[s];
		return a;
	}

	/* Componentwise difference; caller must ensure *this >= b. */
	MultiIndex minus(const MultiIndex& b) const
	{
		assert(contains(b));
		MultiIndex a = *this;
		for (int s = 0; s < dim(); ++s)
			a.counts_[s] -= b.counts_[s];
		return a;
	}

	MultiIndex minus(int dir) const
	{
		assert(counts_[dir] > 0);
		MultiIndex a = *this;
		a.counts_[dir] -= 1;
		return a;
	}

	/* beta <= alpha componentwise */
	bool contains(const MultiIndex& b) const
	{
		assert(dim() == b.dim());
		for (int s = 0; s < dim(); ++s)
			if (counts_[s] < b.counts_[s])
				return false;
		return true;
	}

	bool operator==(const MultiIndex& b) const { return counts_ == b.counts_; }
	bool operator!=(const MultiIndex& b) const { return counts_ != b.counts_; }

	const std::vector<int>& counts() const { return counts_; }

private:
	std::vector<int> counts_;
};

/* Canonical order on multi-indices: by |alpha| first, then colexicographic
 * (last differing direction decides).  Total, used for term ordering and for
 * deterministic iteration everywhere. */
inline int multi_index_cmp(const MultiIndex& a, const MultiIndex& b)
{
	assert(a.dim() == b.dim());
	if (a.order() != b.order())
		return a.order() < b.order() ? -1 : 1;
	for (int s = a.dim() - 1; s >= 0; --s)
		if (a[s] != b[s])
			return a[s] < b[s] ? -1 : 1;
	return 0;
}

struct MultiIndexLess {
	bool operator()(const MultiIndex& a, const MultiIndex& b) const { return multi_index_cmp(a, b) < 0; }
};

/* alpha! = prod alpha_s!  Orders stay small (caps are single digits), so
 * plain integer arithmetic is exact. */
inline long multi_factorial(const MultiIndex& a)
{
	long f = 1;
	for (int s = 0; s < a.dim(); ++s)
		for (int c = 2; c <= a[s]; ++c)
			f *= c;
	return f;
}

/* (alpha+beta)! / (alpha! beta!) = prod C(alpha_s + beta_s, beta_s) */
inline long multi_binomial(const MultiIndex& alpha, const MultiIndex& beta)
{
	assert(alpha.dim() == beta.dim());
	long r = 1;
	for (int s = 0; s < alpha.dim(); ++s)
	{
		long n = alpha[s] + beta[s];
		long k = beta[s];
		long c = 1;
		for (long t = 1; t <= k; ++t)
			c = c * (n - k + t) / t;
		r *= c;
	}
	return r;
}

/* C(alpha, beta) for beta <= alpha, i.e. alpha! / (beta! (alpha-beta)!) */
inline long multi_choose(const MultiIndex& alpha, const MultiIndex& beta)
{
	return multi_binomial(alpha.minus(beta), beta);
}

/* All multi-indices of exact order q, emitted in multi_index_cmp order. */
std::vector<MultiIndex> multi_indices_of_order(int dim, int q);

/* All multi-indices with order <= q, in multi_index_cmp order. */
std::vector<MultiIndex> multi_indices_up_to(int dim, int q);

/* All splittings beta + gamma = alpha, as (beta, gamma) pairs. */
std::vector<std::pair<MultiIndex, MultiIndex>> multi_index_splits(const MultiIndex& alpha);

} // namespace jetvar
