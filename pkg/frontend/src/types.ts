// Wire types for the tourguide session service event schema.

export interface RouteCard {
  route_id: string;
  name: string;
  spots: string[];
  transport: string;
  tags?: Array<{ key: string; value: string }>;
  description?: string;
}

export type ServerEvent =
  | { type: "utterance"; text: string; seq: number }
  | { type: "filler"; text: string; seq: number }
  | { type: "image"; image_id: string; seq: number }
  | { type: "routes"; routes: RouteCard[]; reasons: string[]; seq: number }
  | { type: "end"; seq: number };

export type MessageSide = "user" | "system" | "filler";

export interface ChatMessage {
  side: MessageSide;
  text: string;
}

export interface RoutePanel {
  routes: [RouteCard, RouteCard];
  reasons: string[];
}

export interface ChatViewState {
  messages: ChatMessage[];
  imagePanel: string | null;
  routePanel: RoutePanel | null;
  inputEnabled: boolean;
  ended: boolean;
  /** highest event seq applied so far; stale/duplicate events are dropped */
  lastSeq: number;
  /** transient banner: turn errors, retry hints, ended notice */
  notice: string | null;
}

export interface CreateSessionResponse {
  session_id: string;
  events: ServerEvent[];
}

export interface UtteranceResponse {
  events: ServerEvent[];
}
