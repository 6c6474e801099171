/**
 * @file nnelast.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "nnelast/analysis.hpp"
#include "nnelast/assembly.hpp"
#include "nnelast/element.hpp"
#include "nnelast/fields.hpp"
#include "nnelast/material.hpp"
#include "nnelast/mesh.hpp"
#include "nnelast/problem.hpp"
#include "nnelast/quadrature.hpp"
#include "nnelast/solver.hpp"
#include "nnelast/spaces.hpp"
#include "nnelast/study.hpp"
#include "nnelast/tensor.hpp"
#include "nnelast/verify.hpp"
