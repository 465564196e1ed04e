#pragma once

#include <vector>

#include "bife/core_types.hpp"
#include "bife/likelihood.hpp"
#include "bife/link.hpp"

// Straight serial double loops over (i, t), written from the formulas with no
// blocking, no OpenMP and no shared helpers beyond the link. Kept to check and
// benchmark the production kernels.
namespace bife::reference {

MatrixXd linear_index(const PanelData& data, const ParameterSet& params);

double loglik(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
              IndexBounds bounds = {});

MatrixXd score_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                     const LinkFamily& link, IndexBounds bounds = {});

MatrixXd score_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params, const LinkFamily& link,
                 IndexBounds bounds = {});

std::vector<MatrixXd> hessian_theta(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                    const LinkFamily& link, IndexBounds bounds = {},
                                    HessianForm form = HessianForm::Full);

std::vector<MatrixXd> hessian_f(const MatrixXd& y, const PanelData& data, const ParameterSet& params,
                                const LinkFamily& link, IndexBounds bounds = {},
                                HessianForm form = HessianForm::Full);

}  // namespace bife::reference
