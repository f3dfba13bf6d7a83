import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { RenderModel } from "./render-model";

export interface Viewer {
  update(model: RenderModel): void;
  setTopDown(on: boolean): void;
  dispose(): void;
}

/** Three.js view of the scene's boxes: translucent solids with name
 * billboards, highlighted when the last edit touched them, plus wireframe
 * ghosts for the displayed plan's before poses. Orbit camera with a
 * top-down toggle. The scene's z-up coordinates are mapped onto three's
 * y-up by rotating the root group. */
export class ThreeViewer implements Viewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private root = new THREE.Group();
  private boxes = new THREE.Group();
  private savedPose: { position: THREE.Vector3; target: THREE.Vector3 } | null = null;
  private animating = true;

  constructor(private container: HTMLElement) {
    const width = container.clientWidth || 800;
    const height = container.clientHeight || 600;
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(width, height);
    this.renderer.setPixelRatio(window.devicePixelRatio ?? 1);
    container.appendChild(this.renderer.domElement);

    this.scene.background = new THREE.Color(0x10141a);
    this.camera = new THREE.PerspectiveCamera(50, width / height, 0.01, 500);
    this.camera.position.set(9, 8, 12);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;

    this.root.rotation.x = -Math.PI / 2; // scene z-up -> three y-up
    this.root.add(this.boxes);
    this.scene.add(this.root);
    this.scene.add(new THREE.HemisphereLight(0xffffff, 0x334, 1.1));
    const sun = new THREE.DirectionalLight(0xffffff, 0.8);
    sun.position.set(5, 10, 4);
    this.scene.add(sun);
    this.scene.add(new THREE.GridHelper(20, 20, 0x2a3442, 0x1c2430));

    window.addEventListener("resize", this.onResize);
    this.renderer.setAnimationLoop(() => {
      if (!this.animating) return;
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    });
  }

  private onResize = () => {
    const width = this.container.clientWidth || 800;
    const height = this.container.clientHeight || 600;
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(width, height);
  };

  update(model: RenderModel): void {
    this.boxes.clear();
    for (const box of model.boxes) {
      const size = [
        box.max[0] - box.min[0],
        box.max[1] - box.min[1],
        box.max[2] - box.min[2],
      ] as const;
      const center = [
        (box.min[0] + box.max[0]) / 2,
        (box.min[1] + box.max[1]) / 2,
        (box.min[2] + box.max[2]) / 2,
      ] as const;
      const geometry = new THREE.BoxGeometry(...size);
      const color = box.ghost ? 0x8899aa : box.highlighted ? 0xffb347 : 0x4f9dde;
      const mesh = new THREE.Mesh(geometry, new THREE.MeshStandardMaterial({
        color,
        transparent: true,
        opacity: box.ghost ? 0.12 : 0.45,
        depthWrite: false,
      }));
      mesh.position.set(...center);
      this.boxes.add(mesh);
      const edges = new THREE.LineSegments(
        new THREE.EdgesGeometry(geometry),
        new THREE.LineBasicMaterial({
          color: box.ghost ? 0x667788 : box.highlighted ? 0xffd27f : 0x9fc6ea,
        }));
      edges.position.copy(mesh.position);
      this.boxes.add(edges);
      if (!box.ghost) {
        const label = makeLabel(box.name);
        label.position.set(center[0], center[1], box.max[2] + 0.25);
        this.boxes.add(label);
      }
    }
  }

  setTopDown(on: boolean): void {
    if (on && this.savedPose === null) {
      this.savedPose = {
        position: this.camera.position.clone(),
        target: this.controls.target.clone(),
      };
      const target = this.controls.target.clone();
      this.camera.position.set(target.x, target.y + 18, target.z + 0.01);
      this.camera.lookAt(target);
    } else if (!on && this.savedPose !== null) {
      this.camera.position.copy(this.savedPose.position);
      this.controls.target.copy(this.savedPose.target);
      this.savedPose = null;
    }
  }

  dispose(): void {
    this.animating = false;
    this.renderer.setAnimationLoop(null);
    window.removeEventListener("resize", this.onResize);
    this.renderer.dispose();
  }
}

function makeLabel(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  const context = canvas.getContext("2d")!;
  const font = "28px system-ui, sans-serif";
  context.font = font;
  const width = Math.ceil(context.measureText(text).width) + 20;
  canvas.width = width;
  canvas.height = 44;
  context.font = font;
  context.fillStyle = "rgba(12, 16, 22, 0.75)";
  context.fillRect(0, 0, width, 44);
  context.fillStyle = "#e8eef5";
  context.textBaseline = "middle";
  context.fillText(text, 10, 24);
  const texture = new THREE.CanvasTexture(canvas);
  const sprite = new THREE.Sprite(new THREE.SpriteMaterial({
    map: texture,
    transparent: true,
  }));
  sprite.scale.set(width / 90, 0.5, 1);
  return sprite;
}
