from problem.problem import OUTWARD_NORMALS, HelmholtzProblem, eval_g, exact_solution
from problem.views import BoundarySource, ProblemConfig, SourceParams
