"""Instruction-driven 3D scene editing on conformal geometric algebra."""

from .cga_core import (DilationSpec, MotorDecomposition, Multivector, RotorSpec,
                       TranslationSpec, compose_motor, decompose_motor, dilator,
                       dilator_inverse, embed_point, embed_sphere, extract_point,
                       extract_sphere, quaternion_from_rotor, rotor_from_quaternion,
                       sandwich, translator, translator_inverse, versor_inverse)
from .cga_expr import canonical_print, evaluate, evaluate_text, parse, print_ast
from .collision_resolver import (Placement, ResolverConfig, detect_collisions,
                                 resolve)
from .edit_pipeline import (EditPlan, PipelineConfig, SceneStore, execute_edit,
                            run_edit)
from .errors import CgaSceneError
from .llm_gateway import (HttpChatTransport, LlmConfig, MockTransport,
                          PromptStrategy, build_context, build_prompt, complete,
                          load_strategy, mock_transport, parse_response)
from .nl_templating import TemplatedQuery, detemplate, template_query
from .scene_model import (Scene, SceneObject, apply_decomposition, load_scene,
                          save_scene, scene_to_dict)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
