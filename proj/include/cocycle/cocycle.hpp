#pragma once

#include <cocycle/enumeration.hpp>
#include <cocycle/errors.hpp>
#include <cocycle/hull.hpp>
#include <cocycle/io.hpp>
#include <cocycle/legendre.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/measures.hpp>
#include <cocycle/pressure.hpp>
#include <cocycle/shift_space.hpp>
#include <cocycle/typicality.hpp>
