import { ApiClient, ApiError } from "./api.js";
import { buildProfileForm, readProfileForm, showFieldErrors } from "./form.js";
import { readFeedbackForm, renderResult, showFeedbackError } from "./result.js";
import type { PredictionDoc, SchemaDoc } from "./types.js";

type View = "register" | "login" | "profile" | "result";

// Single-page flow: register -> login -> profile form -> result -> feedback.
// One in-flight prediction at a time; everything shown comes from server
// responses.
export class App {
  private schemaDoc: SchemaDoc | null = null;
  private prediction: PredictionDoc | null = null;
  private busy = false;

  constructor(
    private root: HTMLElement,
    readonly api: ApiClient,
  ) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <h1>CGPA outlook</h1>
      <div class="banner" hidden></div>
      <main class="view"></main>
    `;
    try {
      this.schemaDoc = await this.api.schema();
    } catch (err) {
      this.showError(err, () => this.start());
      return;
    }
    this.show(this.api.authenticated ? "profile" : "register");
  }

  get view(): HTMLElement {
    return this.root.querySelector<HTMLElement>(".view")!;
  }

  show(view: View): void {
    this.clearError();
    if (view === "register") this.renderRegister();
    else if (view === "login") this.renderLogin();
    else if (view === "profile") this.renderProfile();
    else this.renderResult();
    this.root.dataset.view = view;
  }

  // -- error surface ---------------------------------------------------------

  private showError(err: unknown, retry?: () => void): void {
    const banner = this.root.querySelector<HTMLElement>(".banner")!;
    const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    banner.innerHTML = "";
    banner.append(message + " ");
    if (retry) {
      const button = document.createElement("button");
      button.textContent = "Retry";
      button.className = "retry";
      button.addEventListener("click", () => retry());
      banner.appendChild(button);
    }
    banner.hidden = false;
  }

  private clearError(): void {
    const banner = this.root.querySelector<HTMLElement>(".banner");
    if (banner) banner.hidden = true;
  }

  // -- views ---------------------------------------------------------

  private credentialForm(title: string, submitLabel: string, alt: string, altView: View) {
    this.view.innerHTML = `
      <h2>${title}</h2>
      <label>Email <input type="email" name="email" /></label>
      <label>Password <input type="password" name="credential" minlength="8" /></label>
      <button type="button" name="submit">${submitLabel}</button>
      <button type="button" name="alt" class="linkish">${alt}</button>
    `;
    const email = this.view.querySelector<HTMLInputElement>('[name="email"]')!;
    const credential = this.view.querySelector<HTMLInputElement>('[name="credential"]')!;
    this.view.querySelector('[name="alt"]')!.addEventListener("click", () =>
      this.show(altView),
    );
    return { email, credential };
  }

  private renderRegister(): void {
    const { email, credential } = this.credentialForm(
      "Create your account", "Register", "I already have an account", "login");
    this.view.querySelector('[name="submit"]')!.addEventListener("click", async () => {
      this.clearError();
      try {
        await this.api.register(email.value.trim(), credential.value);
        await this.api.login(email.value.trim(), credential.value);
        this.show("profile");
      } catch (err) {
        this.showError(err);
      }
    });
  }

  private renderLogin(): void {
    const { email, credential } = this.credentialForm(
      "Log in", "Log in", "Create an account instead", "register");
    this.view.querySelector('[name="submit"]')!.addEventListener("click", async () => {
      this.clearError();
      try {
        await this.api.login(email.value.trim(), credential.value);
        this.show("profile");
      } catch (err) {
        this.showError(err);
      }
    });
  }

  private renderProfile(): void {
    this.view.innerHTML = `
      <h2>Your academic and socio-economic profile</h2>
      <div class="profile-form"></div>
      <button type="button" name="predict">Predict my CGPA</button>
    `;
    const formHost = this.view.querySelector<HTMLElement>(".profile-form")!;
    buildProfileForm(this.schemaDoc!, formHost);
    this.view.querySelector('[name="predict"]')!.addEventListener("click", () =>
      this.submitProfile(formHost),
    );
  }

  async submitProfile(formHost: HTMLElement): Promise<void> {
    if (this.busy) return;
    this.clearError();
    const { values, errors } = readProfileForm(this.schemaDoc!, formHost);
    showFieldErrors(formHost, errors);
    if (Object.keys(errors).length > 0) return;
    this.busy = true;
    try {
      this.prediction = await this.api.predict(values);
      this.show("result");
    } catch (err) {
      if (err instanceof ApiError && (err.code === "TokenExpired" || err.code === "TokenInvalid")) {
        this.api.logout();
        this.show("login");
        this.showError(err);
      } else if (err instanceof ApiError && err.code === "ValidationFailed") {
        const fieldErrors: Record<string, string> = {};
        for (const f of err.fields) fieldErrors[f] = err.message;
        showFieldErrors(formHost, fieldErrors);
      } else {
        this.showError(err, () => this.submitProfile(formHost));
      }
    } finally {
      this.busy = false;
    }
  }

  private renderResult(): void {
    this.view.innerHTML = "";
    const host = document.createElement("div");
    host.className = "result";
    this.view.appendChild(host);
    renderResult(host, this.prediction!);

    const back = document.createElement("button");
    back.textContent = "Edit profile";
    back.addEventListener("click", () => this.show("profile"));
    this.view.appendChild(back);

    host.querySelector('[name="send-feedback"]')!.addEventListener("click", () =>
      this.submitFeedback(host),
    );
  }

  async submitFeedback(host: HTMLElement): Promise<void> {
    const reading = readFeedbackForm(host);
    if (reading.error) {
      showFeedbackError(host, reading.error);
      return;  // invalid input never leaves the client
    }
    showFeedbackError(host, "");
    try {
      await this.api.feedback({
        prediction_id: this.prediction!.prediction_id,
        rating: reading.rating,
        actual_cgpa: reading.actual_cgpa,
        comment: reading.comment,
      });
      const done = host.querySelector<HTMLElement>(".feedback-done");
      if (done) done.textContent = "Thanks, feedback recorded.";
    } catch (err) {
      if (err instanceof ApiError && (err.code === "TokenExpired" || err.code === "TokenInvalid")) {
        this.api.logout();
        this.show("login");
      }
      showFeedbackError(host, err instanceof ApiError ? err.message : String(err));
    }
  }
}
