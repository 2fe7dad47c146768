#pragma once

#include <crdual/adaptive.hpp>
#include <crdual/duality.hpp>
#include <crdual/elasticity_tensor.hpp>
#include <crdual/field_io.hpp>
#include <crdual/forms.hpp>
#include <crdual/mesh.hpp>
#include <crdual/mesh_io.hpp>
#include <crdual/problems.hpp>
#include <crdual/quadrature.hpp>
#include <crdual/sparse.hpp>
#include <crdual/spaces.hpp>
#include <crdual/types.hpp>
